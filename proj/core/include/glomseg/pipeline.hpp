#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glomseg/annot.hpp"
#include "glomseg/metrics.hpp"
#include "glomseg/nets.hpp"
#include "glomseg/phantom.hpp"
#include "glomseg/train.hpp"

namespace glomseg {

struct PatchExtractSpec {
  std::vector<std::string> sources;  // image paths
  int downscale_factor = 8;
  int patch_size = 500;
  int patches_per_image = 100;
  std::uint64_t seed = 0;
  std::string out_dir;

  void validate() const;
};

// Box-filter downscale by factor x factor block averaging, then uniform random
// top-left crops; filenames encode source stem and patch index.
std::vector<std::string> extract_patches(const PatchExtractSpec& spec);
ImageBuffer box_downscale(const ImageBuffer& image, int factor);

struct DataConfig {
  int n_label_patches = 200;
  int n_phantom_train = 200;
  int n_phantom_test = 13;  // first test patch is held out for epoch optimization
  std::string real_image_dir;  // when set, replaces phantom training images
  std::string stain = "a";     // phantom color preset: "a" or "b"
};

struct ExperimentConfig {
  Setting setting = Setting::MC;
  std::uint64_t seed = 17;
  std::string out_root = "runs";
  AnnotParams annot;
  PhantomParams phantom;
  NetSpec net;
  TrainConfig train;
  EvalOptions eval;
  DataConfig data;

  void validate() const;
  // Derived: label-domain channel count for the setting.
  int label_channels() const { return is_multiclass(setting) ? 2 : 1; }
};

ExperimentConfig experiment_config_from_json(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& config);

// Desk-scale defaults: 128x128 patches, a couple of glomeruli per patch,
// nuclei density matching the reference parameters' areal density.
ExperimentConfig desk_default_config();

struct EpochScores {
  int epoch = 0;
  PixelScores pixel;
  ObjectScores object;
};

struct ExperimentSummary {
  std::string setting;
  std::uint64_t seed = 0;
  int epochs = 0;
  std::vector<EpochScores> per_epoch;  // test-set scores per checkpoint
  int best_epoch = 0;                  // argmax pixel F1 on the held-out patch
  EpochScores incl_optimization;       // test scores at best_epoch
  EpochScores excl_optimization;       // test scores at the final epoch
};

// simulate -> phantom/ingest -> train -> per-epoch translate+evaluate ->
// select epoch -> summary.json. Returns the run directory. Stage failures
// throw with the stage name; partial artifacts stay on disk.
std::string run_experiment(const ExperimentConfig& config);

ExperimentSummary load_summary(const std::string& summary_path);

// Cross-run CSV (setting, repetition, epoch, F, P, R, F_o, P_o, R_o) plus one
// self-contained SVG line chart of F/F_o versus epoch per setting. Runs with a
// missing summary.json are listed and skipped; the function reports failure.
bool emit_report(const std::vector<std::string>& run_dirs, const std::string& out_dir);

}  // namespace glomseg
