#include "glomseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "glomseg/annot.hpp"

namespace glomseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Zero-denominator convention shared by pixel and object scores.
double safe_ratio(std::int64_t num, std::int64_t den, bool both_empty) {
  if (den == 0) return both_empty ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

void fill_fpr(double& f1, double& precision, double& recall, std::int64_t tp, std::int64_t fp,
              std::int64_t fn) {
  const bool both_empty = (tp + fp == 0) && (tp + fn == 0);
  precision = safe_ratio(tp, tp + fp, both_empty);
  recall = safe_ratio(tp, tp + fn, both_empty);
  f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

}  // namespace

PixelScores pixel_scores(const Mask& pred, const Mask& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw std::invalid_argument("pixel_scores: mask sizes differ (" + std::to_string(pred.height) +
                                "x" + std::to_string(pred.width) + " vs " +
                                std::to_string(gt.height) + "x" + std::to_string(gt.width) + ")");
  }
  PixelScores s;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const bool p = pred.data[i] != 0;
    const bool g = gt.data[i] != 0;
    s.tp += p && g;
    s.fp += p && !g;
    s.fn += !p && g;
  }
  fill_fpr(s.f1, s.precision, s.recall, s.tp, s.fp, s.fn);
  return s;
}

std::vector<Component> connected_components(const Mask& mask) {
  const int h = mask.height;
  const int w = mask.width;
  std::vector<std::int32_t> label(mask.data.size(), -1);
  std::vector<Component> components;
  std::vector<std::int32_t> stack;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int32_t start = y * w + x;
      if (mask.data[start] == 0 || label[start] >= 0) continue;
      const std::int32_t id = static_cast<std::int32_t>(components.size());
      Component comp;
      comp.min_row = y;
      comp.min_col = x;
      double sum_x = 0.0, sum_y = 0.0;
      stack.clear();
      stack.push_back(start);
      label[start] = id;
      while (!stack.empty()) {
        const std::int32_t p = stack.back();
        stack.pop_back();
        const int py = p / w;
        const int px = p % w;
        comp.area += 1;
        sum_x += px + 0.5;
        sum_y += py + 0.5;
        comp.min_row = std::min(comp.min_row, py);
        comp.min_col = std::min(comp.min_col, px);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const int ny = py + dy;
            const int nx = px + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            const std::int32_t np = ny * w + nx;
            if (mask.data[np] != 0 && label[np] < 0) {
              label[np] = id;
              stack.push_back(np);
            }
          }
        }
      }
      comp.cx = sum_x / comp.area;
      comp.cy = sum_y / comp.area;
      components.push_back(comp);
    }
  }
  // scan order does not guarantee (min row, min col) ordering for concave
  // shapes, so sort explicitly; stable to keep raster order on ties
  std::stable_sort(components.begin(), components.end(),
                   [](const Component& a, const Component& b) {
                     return std::pair(a.min_row, a.min_col) < std::pair(b.min_row, b.min_col);
                   });
  return components;
}

ObjectScores object_scores(const Mask& pred,
                           const std::vector<std::pair<double, double>>& gt_centers,
                           double match_radius, std::int64_t min_area) {
  if (match_radius <= 0.0) throw std::invalid_argument("object_scores: match_radius must be > 0");
  ObjectScores s;
  s.match_radius = match_radius;

  std::vector<Component> comps = connected_components(pred);
  if (min_area > 0) {
    std::erase_if(comps, [min_area](const Component& c) { return c.area < min_area; });
  }

  struct Candidate {
    double dist;
    int pred_idx, gt_idx;
  };
  std::vector<Candidate> candidates;
  for (int pi = 0; pi < static_cast<int>(comps.size()); ++pi) {
    for (int gi = 0; gi < static_cast<int>(gt_centers.size()); ++gi) {
      const double dx = comps[pi].cx - gt_centers[gi].first;
      const double dy = comps[pi].cy - gt_centers[gi].second;
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (dist < match_radius) candidates.push_back({dist, pi, gi});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.dist, a.pred_idx, a.gt_idx) < std::tie(b.dist, b.pred_idx, b.gt_idx);
  });

  std::vector<bool> pred_used(comps.size(), false);
  std::vector<bool> gt_used(gt_centers.size(), false);
  for (const Candidate& c : candidates) {
    if (pred_used[c.pred_idx] || gt_used[c.gt_idx]) continue;
    pred_used[c.pred_idx] = true;
    gt_used[c.gt_idx] = true;
    s.tp += 1;
  }
  s.fp = static_cast<int>(comps.size()) - s.tp;
  s.fn = static_cast<int>(gt_centers.size()) - s.tp;
  fill_fpr(s.f1, s.precision, s.recall, s.tp, s.fp, s.fn);
  return s;
}

EvalReport evaluate_masks(const std::vector<std::string>& ids, const std::vector<Mask>& preds,
                          const std::vector<Mask>& gts,
                          const std::vector<std::vector<std::pair<double, double>>>& gt_centers,
                          const EvalOptions& options) {
  if (ids.size() != preds.size() || preds.size() != gts.size() ||
      gts.size() != gt_centers.size()) {
    throw std::invalid_argument("evaluate_masks: input lists must have equal length");
  }
  EvalReport report;
  report.options = options;
  std::int64_t otp = 0, ofp = 0, ofn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    PatchEval pe;
    pe.id = ids[i];
    pe.pixel = pixel_scores(preds[i], gts[i]);
    pe.object = object_scores(preds[i], gt_centers[i], options.match_radius, options.min_area);
    report.pixel.tp += pe.pixel.tp;
    report.pixel.fp += pe.pixel.fp;
    report.pixel.fn += pe.pixel.fn;
    otp += pe.object.tp;
    ofp += pe.object.fp;
    ofn += pe.object.fn;
    report.per_patch.push_back(std::move(pe));
  }
  fill_fpr(report.pixel.f1, report.pixel.precision, report.pixel.recall, report.pixel.tp,
           report.pixel.fp, report.pixel.fn);
  report.object.match_radius = options.match_radius;
  report.object.tp = static_cast<int>(otp);
  report.object.fp = static_cast<int>(ofp);
  report.object.fn = static_cast<int>(ofn);
  fill_fpr(report.object.f1, report.object.precision, report.object.recall, otp, ofp, ofn);
  return report;
}

EvalReport evaluate_run(const std::string& pred_dir, const std::string& gt_dir,
                        const EvalOptions& options) {
  const std::vector<std::string> pred_files = list_png_files(pred_dir);
  if (pred_files.empty()) throw std::runtime_error("no prediction PNGs in " + pred_dir);

  std::vector<std::string> ids;
  std::vector<Mask> preds, gts;
  std::vector<std::vector<std::pair<double, double>>> centers;
  for (const std::string& pf : pred_files) {
    const fs::path name = fs::path(pf).filename();
    const fs::path gt_path = fs::path(gt_dir) / name;
    if (!fs::exists(gt_path)) {
      throw std::runtime_error("missing ground-truth counterpart for " + name.string());
    }
    preds.push_back(read_mask_png(pf));
    gts.push_back(read_mask_png(gt_path.string()));
    std::vector<std::pair<double, double>> ctrs;
    if (options.centers_from_sidecar) {
      fs::path sidecar = gt_path;
      sidecar.replace_extension(".json");
      if (!fs::exists(sidecar)) {
        throw std::runtime_error("missing sidecar for " + name.string());
      }
      for (const ShapeInstance& s : load_shape_sidecar(sidecar.string())) {
        ctrs.emplace_back(s.cx, s.cy);
      }
    } else {
      for (const Component& c : connected_components(gts.back())) {
        ctrs.emplace_back(c.cx, c.cy);
      }
    }
    centers.push_back(std::move(ctrs));
    ids.push_back(name.stem().string());
  }
  return evaluate_masks(ids, preds, gts, centers, options);
}

namespace {

json scores_to_json(std::int64_t tp, std::int64_t fp, std::int64_t fn, double f1, double precision,
                    double recall) {
  json j;
  j["tp"] = tp;
  j["fp"] = fp;
  j["fn"] = fn;
  j["F"] = f1;
  j["P"] = precision;
  j["R"] = recall;
  return j;
}

json patch_to_json(const PatchEval& pe) {
  json j;
  j["id"] = pe.id;
  j["pixel"] = scores_to_json(pe.pixel.tp, pe.pixel.fp, pe.pixel.fn, pe.pixel.f1,
                              pe.pixel.precision, pe.pixel.recall);
  j["object"] = scores_to_json(pe.object.tp, pe.object.fp, pe.object.fn, pe.object.f1,
                               pe.object.precision, pe.object.recall);
  return j;
}

}  // namespace

void write_report_json(const EvalReport& report, const std::string& path) {
  json j;
  j["options"] = {{"match_radius", report.options.match_radius},
                  {"min_area", report.options.min_area},
                  {"centers_from_sidecar", report.options.centers_from_sidecar},
                  {"threshold", report.options.threshold}};
  j["per_patch"] = json::array();
  for (const PatchEval& pe : report.per_patch) j["per_patch"].push_back(patch_to_json(pe));
  j["aggregate"]["pixel"] = scores_to_json(report.pixel.tp, report.pixel.fp, report.pixel.fn,
                                           report.pixel.f1, report.pixel.precision,
                                           report.pixel.recall);
  j["aggregate"]["object"] = scores_to_json(report.object.tp, report.object.fp, report.object.fn,
                                            report.object.f1, report.object.precision,
                                            report.object.recall);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << j.dump(2) << "\n";
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "id,pixel_tp,pixel_fp,pixel_fn,F,P,R,object_tp,object_fp,object_fn,F_o,P_o,R_o\n";
  auto row = [&out](const std::string& id, const PixelScores& px, const ObjectScores& ob) {
    out << id << "," << px.tp << "," << px.fp << "," << px.fn << "," << json(px.f1).dump() << ","
        << json(px.precision).dump() << "," << json(px.recall).dump() << "," << ob.tp << ","
        << ob.fp << "," << ob.fn << "," << json(ob.f1).dump() << "," << json(ob.precision).dump()
        << "," << json(ob.recall).dump() << "\n";
  };
  for (const PatchEval& pe : report.per_patch) row(pe.id, pe.pixel, pe.object);
  row("aggregate", report.pixel, report.object);
}

}  // namespace glomseg
