#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "glomseg/image.hpp"

namespace glomseg {

// F/P/R convention: a ratio with zero denominator is 1 when both masks (or
// object sets) are empty -- perfect agreement -- and 0 when exactly one is.
// F = 2PR/(P+R), 0 when P+R = 0.
struct PixelScores {
  double f1 = 0, precision = 0, recall = 0;
  std::int64_t tp = 0, fp = 0, fn = 0;
};

PixelScores pixel_scores(const Mask& pred, const Mask& gt);

struct Component {
  double cx = 0, cy = 0;  // centroid of pixel centers (col+0.5, row+0.5)
  std::int64_t area = 0;
  int min_row = 0, min_col = 0;
};

// 8-connectivity; components ordered by (min row, min col).
std::vector<Component> connected_components(const Mask& mask);

struct ObjectScores {
  double f1 = 0, precision = 0, recall = 0;
  int tp = 0, fp = 0, fn = 0;
  double match_radius = 10.0;
};

// Greedy one-to-one matching: candidate (pred, gt) pairs with centroid
// distance strictly below match_radius, sorted by (distance, pred index, gt
// index); each accepted pair retires both endpoints. Predicted components
// below min_area are discarded first (0 = keep all).
ObjectScores object_scores(const Mask& pred, const std::vector<std::pair<double, double>>& gt_centers,
                           double match_radius = 10.0, std::int64_t min_area = 0);

struct EvalOptions {
  double match_radius = 10.0;
  std::int64_t min_area = 0;
  // Ground-truth object centers: centroids of the gt-mask components (treats
  // both sides symmetrically, clipped shapes included) or the sidecar JSON.
  bool centers_from_sidecar = false;

  // Report fields.
  float threshold = 0.5f;
};

struct PatchEval {
  std::string id;
  PixelScores pixel;
  ObjectScores object;
};

struct EvalReport {
  EvalOptions options;
  std::vector<PatchEval> per_patch;
  PixelScores pixel;    // micro-aggregate over pooled pixel counts
  ObjectScores object;  // micro-aggregate over pooled object counts
};

EvalReport evaluate_masks(const std::vector<std::string>& ids, const std::vector<Mask>& preds,
                          const std::vector<Mask>& gts,
                          const std::vector<std::vector<std::pair<double, double>>>& gt_centers,
                          const EvalOptions& options);

// Directory form: every pred PNG must have a gt PNG of the same filename.
// With centers_from_sidecar, gt/<stem>.json supplies the object centers.
EvalReport evaluate_run(const std::string& pred_dir, const std::string& gt_dir,
                        const EvalOptions& options);

void write_report_json(const EvalReport& report, const std::string& path);
void write_report_csv(const EvalReport& report, const std::string& path);

}  // namespace glomseg
