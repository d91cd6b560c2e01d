#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glomseg/adam.hpp"
#include "glomseg/annot.hpp"
#include "glomseg/augment.hpp"
#include "glomseg/image.hpp"
#include "glomseg/losses.hpp"
#include "glomseg/nets.hpp"

namespace glomseg {

struct TrainConfig {
  // Reference protocol fixes lr = 1e-6 at full scale; the desk default is
  // 2e-4 (both end up in the loss-log header).
  float lr = 2e-4f;
  int epochs = 10;
  int batch_size = 1;  // the protocol trains with batch size one
  float lambda_cyc = 1.0f;
  float lambda_adv = 1.0f;
  int crop = 64;
  bool flip = true;
  bool rotate = true;
  bool random_crop = true;
  AdvMode adv_mode = AdvMode::NonSaturating;
  std::string out_dir;

  void validate() const;
  AugmentOptions augment_options() const;
};

// Everything one training run mutates: the four nets, their optimizer states,
// counters, and the run's RNG.
struct GanState {
  NetSpec spec;
  ResnetGenerator f;  // X -> Y
  ResnetGenerator g;  // Y -> X
  PatchDiscriminator d_x;
  PatchDiscriminator d_y;
  AdamState opt_f, opt_g, opt_dx, opt_dy;
  int epoch = 0;
  std::int64_t iteration = 0;
  std::uint64_t seed = 0;

  std::vector<std::pair<std::string, Tensor>> named_params() const;
};

GanState init_gan(const NetSpec& spec, const TrainConfig& cfg, std::uint64_t seed);

// Build a GanState whose net parameters come from a checkpoint manifest.
GanState gan_from_checkpoint(const std::string& manifest_path, const NetSpec& spec);

void save_gan_checkpoint(const GanState& state, const std::string& manifest_path);

// Image <-> sample plumbing: PNGs in [0,1] map to [-1,1]; label-domain PNGs
// carry 1 channel (gray) or 2 (R=glomeruli, G=nuclei).
Sample sample_from_image(const ImageBuffer& img, int channels);
std::vector<Sample> load_sample_dir(const std::string& dir, int channels);
Tensor tensor_from_sample(const Sample& s);

struct TrainResult {
  std::vector<std::string> checkpoints;  // manifest paths, one per epoch
  std::string loss_log;                  // CSV path
  std::int64_t iterations = 0;
};

// One full run: per iteration draw one x and one y from independent epoch-wise
// shuffles (wraparound on the smaller set), augment, one discriminator ascent
// step, one generator descent step on lambda_adv * L_adv + lambda_cyc * L_cyc,
// checkpoint after every epoch, CSV row per iteration. Deterministic per seed.
TrainResult train(const std::string& x_dir, const std::string& y_dir, const NetSpec& spec,
                  const TrainConfig& cfg, std::uint64_t seed);

// Single optimization step on an already-loaded batch pair; exposed for tests.
struct StepLosses {
  double cycle = 0.0;
  double adv_d = 0.0;
  double adv_g = 0.0;
};
StepLosses train_step(GanState& state, const Tensor& x, const Tensor& y, const TrainConfig& cfg);

}  // namespace glomseg
