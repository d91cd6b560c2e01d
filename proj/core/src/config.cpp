#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "glomseg/pipeline.hpp"

namespace glomseg {

using nlohmann::json;

void ExperimentConfig::validate() const {
  annot.validate();
  phantom.validate();
  net.validate();
  train.validate();
  if (net.c_y != label_channels()) {
    throw std::invalid_argument("config: net.c_y=" + std::to_string(net.c_y) +
                                " inconsistent with setting " + to_string(setting));
  }
  if (data.n_label_patches < 1 || data.n_phantom_train < 1 || data.n_phantom_test < 2) {
    throw std::invalid_argument(
        "config: need >= 1 label patch, >= 1 training phantom and >= 2 test phantoms "
        "(one is held out for epoch optimization)");
  }
  if (train.crop > annot.patch_h || train.crop > annot.patch_w) {
    throw std::invalid_argument("config: train.crop exceeds the patch size");
  }
  if (data.stain != "a" && data.stain != "b") {
    throw std::invalid_argument("config: stain preset must be \"a\" or \"b\"");
  }
}

ExperimentConfig desk_default_config() {
  ExperimentConfig c;
  c.setting = Setting::MC;
  c.seed = 17;
  c.annot.mu_g = 2.0;
  c.annot.sigma_g = 1.0;
  c.annot.mu_r = 18.0;
  c.annot.sigma_r = 2.0;
  c.annot.sigma_e = 2.0;
  // reference nuclei density (5000 per 500^2) scaled to the 128^2 desk patch
  c.annot.mu_n = 330.0;
  c.annot.sigma_n = 10.0;
  c.annot.d_n = 4.0;
  c.annot.sigma_fn = 5.0;
  c.annot.sigma_fs = 2.0;
  c.annot.patch_h = 128;
  c.annot.patch_w = 128;
  c.annot.setting = c.setting;
  c.net.c_y = c.label_channels();
  c.train.epochs = 10;
  c.train.crop = 64;
  c.data.n_label_patches = 200;
  c.data.n_phantom_train = 200;
  c.data.n_phantom_test = 13;
  return c;
}

namespace {

json annot_to_json(const AnnotParams& p) {
  return json{{"mu_g", p.mu_g},         {"sigma_g", p.sigma_g},
              {"mu_r", p.mu_r},         {"sigma_r", p.sigma_r},
              {"sigma_e", p.sigma_e},   {"mu_n", p.mu_n},
              {"sigma_n", p.sigma_n},   {"d_n", p.d_n},
              {"sigma_fn", p.sigma_fn}, {"sigma_fs", p.sigma_fs},
              {"patch_h", p.patch_h},   {"patch_w", p.patch_w},
              {"max_placement_attempts", p.max_placement_attempts}};
}

void annot_from_json(const json& j, AnnotParams& p) {
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
  p.max_placement_attempts = j.value("max_placement_attempts", p.max_placement_attempts);
}

json phantom_to_json(const PhantomParams& p) {
  return json{{"ring_darkness", p.ring_darkness},
              {"ring_width", p.ring_width},
              {"speckle_density", p.speckle_density},
              {"speckle_darkness", p.speckle_darkness},
              {"texture_scale", p.texture_scale},
              {"texture_octaves", p.texture_octaves},
              {"nuclei_density", p.nuclei_density},
              {"nuclei_inside_factor", p.nuclei_inside_factor},
              {"nucleus_diameter", p.nucleus_diameter},
              {"background_mean", p.background_mean},
              {"background_std", p.background_std},
              {"object_mean", p.object_mean},
              {"object_std", p.object_std},
              {"nuclei_mean", p.nuclei_mean}};
}

void phantom_from_json(const json& j, PhantomParams& p) {
  p.ring_darkness = j.value("ring_darkness", p.ring_darkness);
  p.ring_width = j.value("ring_width", p.ring_width);
  p.speckle_density = j.value("speckle_density", p.speckle_density);
  p.speckle_darkness = j.value("speckle_darkness", p.speckle_darkness);
  p.texture_scale = j.value("texture_scale", p.texture_scale);
  p.texture_octaves = j.value("texture_octaves", p.texture_octaves);
  p.nuclei_density = j.value("nuclei_density", p.nuclei_density);
  p.nuclei_inside_factor = j.value("nuclei_inside_factor", p.nuclei_inside_factor);
  p.nucleus_diameter = j.value("nucleus_diameter", p.nucleus_diameter);
  auto color = [&j](const char* key, std::array<double, 3>& dst) {
    if (j.contains(key)) {
      for (int i = 0; i < 3; ++i) dst[i] = j.at(key).at(i).get<double>();
    }
  };
  color("background_mean", p.background_mean);
  color("background_std", p.background_std);
  color("object_mean", p.object_mean);
  color("object_std", p.object_std);
  color("nuclei_mean", p.nuclei_mean);
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json j;
  j["setting"] = to_string(c.setting);
  j["seed"] = c.seed;
  j["out_root"] = c.out_root;
  j["annot"] = annot_to_json(c.annot);
  j["phantom"] = phantom_to_json(c.phantom);
  j["net"] = {{"gen_width", c.net.gen_width},   {"n_res_blocks", c.net.n_res_blocks},
              {"down_depth", c.net.down_depth}, {"disc_width", c.net.disc_width},
              {"disc_layers", c.net.disc_layers}};
  j["train"] = {{"lr", c.train.lr},
                {"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"lambda_cyc", c.train.lambda_cyc},
                {"lambda_adv", c.train.lambda_adv},
                {"crop", c.train.crop},
                {"flip", c.train.flip},
                {"rotate", c.train.rotate},
                {"random_crop", c.train.random_crop},
                {"adv_mode", to_string(c.train.adv_mode)}};
  j["eval"] = {{"match_radius", c.eval.match_radius},
               {"min_area", c.eval.min_area},
               {"centers_from_sidecar", c.eval.centers_from_sidecar},
               {"threshold", c.eval.threshold}};
  j["data"] = {{"n_label_patches", c.data.n_label_patches},
               {"n_phantom_train", c.data.n_phantom_train},
               {"n_phantom_test", c.data.n_phantom_test},
               {"real_image_dir", c.data.real_image_dir},
               {"stain", c.data.stain}};
  return j.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& json_text) {
  const json j = json::parse(json_text);
  ExperimentConfig c = desk_default_config();
  if (j.contains("setting")) c.setting = setting_from_string(j.at("setting").get<std::string>());
  c.seed = j.value("seed", c.seed);
  c.out_root = j.value("out_root", c.out_root);
  if (j.contains("data")) {
    const json& d = j.at("data");
    c.data.n_label_patches = d.value("n_label_patches", c.data.n_label_patches);
    c.data.n_phantom_train = d.value("n_phantom_train", c.data.n_phantom_train);
    c.data.n_phantom_test = d.value("n_phantom_test", c.data.n_phantom_test);
    c.data.real_image_dir = d.value("real_image_dir", c.data.real_image_dir);
    c.data.stain = d.value("stain", c.data.stain);
  }
  // stain preset first, explicit phantom fields override it
  if (c.data.stain == "b") c.phantom = PhantomParams::stain_b();
  if (j.contains("annot")) annot_from_json(j.at("annot"), c.annot);
  if (j.contains("phantom")) phantom_from_json(j.at("phantom"), c.phantom);
  if (j.contains("net")) {
    const json& n = j.at("net");
    c.net.gen_width = n.value("gen_width", c.net.gen_width);
    c.net.n_res_blocks = n.value("n_res_blocks", c.net.n_res_blocks);
    c.net.down_depth = n.value("down_depth", c.net.down_depth);
    c.net.disc_width = n.value("disc_width", c.net.disc_width);
    c.net.disc_layers = n.value("disc_layers", c.net.disc_layers);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    c.train.lr = t.value("lr", c.train.lr);
    c.train.epochs = t.value("epochs", c.train.epochs);
    c.train.batch_size = t.value("batch_size", c.train.batch_size);
    c.train.lambda_cyc = t.value("lambda_cyc", c.train.lambda_cyc);
    c.train.lambda_adv = t.value("lambda_adv", c.train.lambda_adv);
    c.train.crop = t.value("crop", c.train.crop);
    c.train.flip = t.value("flip", c.train.flip);
    c.train.rotate = t.value("rotate", c.train.rotate);
    c.train.random_crop = t.value("random_crop", c.train.random_crop);
    if (t.contains("adv_mode")) {
      c.train.adv_mode = adv_mode_from_string(t.at("adv_mode").get<std::string>());
    }
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    c.eval.match_radius = e.value("match_radius", c.eval.match_radius);
    c.eval.min_area = e.value("min_area", c.eval.min_area);
    c.eval.centers_from_sidecar = e.value("centers_from_sidecar", c.eval.centers_from_sidecar);
    c.eval.threshold = e.value("threshold", c.eval.threshold);
  }
  // setting drives the label-domain channel count and the simulator mode
  c.annot.setting = c.setting;
  c.net.c_y = c.label_channels();
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return experiment_config_from_json(text);
}

}  // namespace glomseg
