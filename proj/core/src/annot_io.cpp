#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "glomseg/annot.hpp"
#include "glomseg/image.hpp"

namespace glomseg {

using nlohmann::json;

namespace {

json shape_to_json(const ShapeInstance& s) {
  json j;
  j["cx"] = s.cx;
  j["cy"] = s.cy;
  if (const Circle* c = std::get_if<Circle>(&s.geometry)) {
    j["type"] = "circle";
    j["r"] = c->r;
  } else {
    const Ellipse& e = std::get<Ellipse>(s.geometry);
    j["type"] = "ellipse";
    j["r1"] = e.r1;
    j["r2"] = e.r2;
    j["alpha"] = e.alpha;
  }
  return j;
}

ShapeInstance shape_from_json(const json& j) {
  ShapeInstance s;
  s.cx = j.at("cx").get<double>();
  s.cy = j.at("cy").get<double>();
  const std::string type = j.at("type").get<std::string>();
  if (type == "circle") {
    s.geometry = Circle{j.at("r").get<double>()};
  } else if (type == "ellipse") {
    s.geometry = Ellipse{j.at("r1").get<double>(), j.at("r2").get<double>(),
                         j.at("alpha").get<double>()};
  } else {
    throw std::runtime_error("unknown shape type '" + type + "' in sidecar");
  }
  return s;
}

}  // namespace

void save_label_patch(const std::string& png_path, const std::string& sidecar_path,
                      const LabelPatch& patch, Setting setting) {
  if (is_multiclass(setting) != patch.has_nuclei()) {
    throw std::invalid_argument("label patch channels do not match setting " + to_string(setting));
  }
  if (patch.has_nuclei()) {
    ImageBuffer img(patch.height, patch.width, 3);
    for (std::size_t p = 0; p < patch.glom.size(); ++p) {
      img.data[p * 3 + 0] = patch.glom[p];
      img.data[p * 3 + 1] = patch.nuclei[p];
      img.data[p * 3 + 2] = 0.0f;
    }
    write_png(png_path, img);
  } else {
    ImageBuffer img(patch.height, patch.width, 1);
    img.data = patch.glom;
    write_png(png_path, img);
  }

  json j;
  j["setting"] = to_string(setting);
  j["dropped_glomeruli"] = patch.dropped_glomeruli;
  j["dropped_nuclei"] = patch.dropped_nuclei;
  j["shapes"] = json::array();
  for (const ShapeInstance& s : patch.shapes) j["shapes"].push_back(shape_to_json(s));
  std::ofstream out(sidecar_path);
  if (!out) throw std::runtime_error("cannot write sidecar: " + sidecar_path);
  out << j.dump(2) << "\n";
}

std::vector<ShapeInstance> load_shape_sidecar(const std::string& sidecar_path) {
  std::ifstream in(sidecar_path);
  if (!in) throw std::runtime_error("cannot read sidecar: " + sidecar_path);
  json j = json::parse(in);
  std::vector<ShapeInstance> shapes;
  for (const json& sj : j.at("shapes")) shapes.push_back(shape_from_json(sj));
  return shapes;
}

AnnotParams annot_params_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read annotation params: " + path);
  json j = json::parse(in);
  AnnotParams p;
  p.mu_g = j.value("mu_g", p.mu_g);
  p.sigma_g = j.value("sigma_g", p.sigma_g);
  p.mu_r = j.value("mu_r", p.mu_r);
  p.sigma_r = j.value("sigma_r", p.sigma_r);
  p.sigma_e = j.value("sigma_e", p.sigma_e);
  p.mu_n = j.value("mu_n", p.mu_n);
  p.sigma_n = j.value("sigma_n", p.sigma_n);
  p.d_n = j.value("d_n", p.d_n);
  p.sigma_fn = j.value("sigma_fn", p.sigma_fn);
  p.sigma_fs = j.value("sigma_fs", p.sigma_fs);
  p.patch_h = j.value("patch_h", p.patch_h);
  p.patch_w = j.value("patch_w", p.patch_w);
  if (j.contains("setting")) p.setting = setting_from_string(j.at("setting").get<std::string>());
  p.max_placement_attempts = j.value("max_placement_attempts", p.max_placement_attempts);
  p.validate();
  return p;
}

}  // namespace glomseg
