#include "glomseg/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "glomseg/checkpoint.hpp"
#include "glomseg/graph.hpp"
#include "glomseg/ops.hpp"

namespace glomseg {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (lr <= 0.0f) throw std::invalid_argument("train config: lr must be > 0");
  if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
  if (batch_size != 1) throw std::invalid_argument("train config: batch size is fixed to 1");
  if (lambda_cyc < 0.0f || lambda_adv < 0.0f) {
    throw std::invalid_argument("train config: loss weights must be >= 0");
  }
  if (crop < 1) throw std::invalid_argument("train config: crop must be >= 1");
}

AugmentOptions TrainConfig::augment_options() const {
  AugmentOptions a;
  a.flip = flip;
  a.rotate = rotate;
  a.random_crop = random_crop;
  a.crop = crop;
  return a;
}

std::vector<std::pair<std::string, Tensor>> GanState::named_params() const {
  std::vector<std::pair<std::string, Tensor>> out;
  auto push = [&out](const std::string& prefix, const auto& net) {
    for (auto& [name, t] : net.named_params()) out.emplace_back(prefix + "." + name, t);
  };
  push("F", f);
  push("G", g);
  push("DX", d_x);
  push("DY", d_y);
  return out;
}

GanState init_gan(const NetSpec& spec, const TrainConfig& cfg, std::uint64_t seed) {
  spec.validate();
  cfg.validate();
  GanState state;
  state.spec = spec;
  state.seed = seed;
  Rng init_rng(derive_seed(seed, "init"));
  state.f = ResnetGenerator(spec.c_x, spec.c_y, spec, init_rng);
  state.g = ResnetGenerator(spec.c_y, spec.c_x, spec, init_rng);
  state.d_x = PatchDiscriminator(spec.c_x, spec, init_rng);
  state.d_y = PatchDiscriminator(spec.c_y, spec, init_rng);
  for (auto* opt : {&state.opt_f, &state.opt_g, &state.opt_dx, &state.opt_dy}) {
    opt->lr = cfg.lr;
  }
  state.opt_f.init(state.f.params());
  state.opt_g.init(state.g.params());
  state.opt_dx.init(state.d_x.params());
  state.opt_dy.init(state.d_y.params());
  return state;
}

GanState gan_from_checkpoint(const std::string& manifest_path, const NetSpec& spec) {
  const Checkpoint ckpt = load_checkpoint(manifest_path);
  TrainConfig cfg;  // optimizer state is not stored in checkpoints
  GanState state = init_gan(spec, cfg, ckpt.rng_seed);
  load_params_into(ckpt, state.named_params());
  state.epoch = ckpt.epoch;
  state.iteration = ckpt.iteration;
  return state;
}

void save_gan_checkpoint(const GanState& state, const std::string& manifest_path) {
  save_checkpoint(manifest_path, state.named_params(), state.epoch, state.iteration, state.seed);
}

Sample sample_from_image(const ImageBuffer& img, int channels) {
  if (channels != 1 && channels != 2 && channels != 3) {
    throw std::invalid_argument("sample_from_image: channels must be 1, 2 or 3");
  }
  if (channels > img.channels && !(channels == 2 && img.channels == 3)) {
    throw std::invalid_argument("image has " + std::to_string(img.channels) +
                                " channels, need " + std::to_string(channels));
  }
  Sample s;
  s.channels = channels;
  s.height = img.height;
  s.width = img.width;
  s.chw.resize(static_cast<std::size_t>(channels) * img.height * img.width);
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        // label PNGs pack glomeruli in R and nuclei in G
        const float v = img.channels == 1 ? img.at(y, x, 0) : img.at(y, x, c);
        s.chw[(static_cast<std::size_t>(c) * img.height + y) * img.width + x] = v * 2.0f - 1.0f;
      }
    }
  }
  return s;
}

std::vector<Sample> load_sample_dir(const std::string& dir, int channels) {
  const std::vector<std::string> files = list_png_files(dir);
  if (files.empty()) throw std::runtime_error("no PNG files in " + dir);
  std::vector<Sample> out;
  out.reserve(files.size());
  for (const std::string& f : files) out.push_back(sample_from_image(read_png(f), channels));
  return out;
}

Tensor tensor_from_sample(const Sample& s) {
  return Tensor::from_vector(Shape{1, s.channels, s.height, s.width}, s.chw);
}

StepLosses train_step(GanState& state, const Tensor& x, const Tensor& y, const TrainConfig& cfg) {
  if (x.shape().c != state.spec.c_x || y.shape().c != state.spec.c_y) {
    throw std::invalid_argument("train_step: batch channels " + x.shape().str() + "/" +
                                y.shape().str() + " do not match net spec");
  }
  StepLosses losses;

  // Fakes for the discriminator update carry no generator history.
  Tensor fake_y_det, fake_x_det;
  {
    const Tensor fy = state.f.forward(x);
    const Tensor fx = state.g.forward(y);
    fake_y_det = fy.detached_copy();
    fake_x_det = fx.detached_copy();
  }

  // Discriminators first: one ascent step on the log-likelihood objective.
  {
    Graph tape;
    zero_grads(state.d_x.params());
    zero_grads(state.d_y.params());
    Tensor d_obj = discriminator_objective(x, y, fake_x_det, fake_y_det, state.d_x, state.d_y);
    losses.adv_d = d_obj.item();
    Tensor d_loss = affine(d_obj, -1.0f, 0.0f);  // ascend = descend on the negation
    tape.backward(d_loss);
    auto dx_params = state.d_x.params();
    auto dy_params = state.d_y.params();
    adam_step(dx_params, state.opt_dx);
    adam_step(dy_params, state.opt_dy);
  }

  // Then one generator descent step against the updated discriminators.
  {
    Graph tape;
    zero_grads(state.f.params());
    zero_grads(state.g.params());
    zero_grads(state.d_x.params());
    zero_grads(state.d_y.params());
    const Tensor fake_y = state.f.forward(x);
    const Tensor rec_x = state.g.forward(fake_y);
    const Tensor fake_x = state.g.forward(y);
    const Tensor rec_y = state.f.forward(fake_x);
    Tensor l_cyc = add(l1_mean(rec_x, x), l1_mean(rec_y, y));
    Tensor l_adv = generator_objective(x, y, fake_x, fake_y, state.d_x, state.d_y, cfg.adv_mode);
    losses.cycle = l_cyc.item();
    losses.adv_g = l_adv.item();
    Tensor total = add(affine(l_cyc, cfg.lambda_cyc, 0.0f), affine(l_adv, cfg.lambda_adv, 0.0f));
    tape.backward(total);
    auto f_params = state.f.params();
    auto g_params = state.g.params();
    adam_step(f_params, state.opt_f);
    adam_step(g_params, state.opt_g);
  }

  state.iteration += 1;
  return losses;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.uniform_index(i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

TrainResult train(const std::string& x_dir, const std::string& y_dir, const NetSpec& spec,
                  const TrainConfig& cfg, std::uint64_t seed) {
  spec.validate();
  cfg.validate();
  if (cfg.out_dir.empty()) throw std::invalid_argument("train: out_dir must be set");
  fs::create_directories(cfg.out_dir);

  const std::vector<Sample> xs = load_sample_dir(x_dir, spec.c_x);
  const std::vector<Sample> ys = load_sample_dir(y_dir, spec.c_y);
  for (const Sample& s : xs) {
    if (cfg.crop > s.height || cfg.crop > s.width) {
      throw std::invalid_argument("train: crop exceeds an image-domain patch");
    }
  }

  GanState state = init_gan(spec, cfg, seed);
  Rng data_rng(derive_seed(seed, "data"));
  Rng aug_rng(derive_seed(seed, "augment"));
  const AugmentOptions aug = cfg.augment_options();

  TrainResult result;
  const fs::path log_path = fs::path(cfg.out_dir) / "loss_log.csv";
  std::ofstream log(log_path);
  if (!log) throw std::runtime_error("cannot write " + log_path.string());
  log << "# lr=" << format_float(cfg.lr) << " reference_lr=1e-06"
      << " adv_mode=" << to_string(cfg.adv_mode) << " lambda_cyc=" << format_float(cfg.lambda_cyc)
      << " lambda_adv=" << format_float(cfg.lambda_adv) << "\n";
  log << "iter,L_cyc,L_adv_D,L_adv_G\n";

  const std::size_t epoch_len = std::max(xs.size(), ys.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<std::size_t> xi = shuffled_indices(xs.size(), data_rng);
    const std::vector<std::size_t> yi = shuffled_indices(ys.size(), data_rng);
    for (std::size_t k = 0; k < epoch_len; ++k) {
      const Sample sx = augment(xs[xi[k % xs.size()]], aug, aug_rng);
      const Sample sy = augment(ys[yi[k % ys.size()]], aug, aug_rng);
      const StepLosses losses = train_step(state, tensor_from_sample(sx), tensor_from_sample(sy), cfg);
      if (!std::isfinite(losses.cycle) || !std::isfinite(losses.adv_d) ||
          !std::isfinite(losses.adv_g)) {
        throw std::runtime_error("non-finite loss at iteration " +
                                 std::to_string(state.iteration));
      }
      log << state.iteration << "," << format_float(losses.cycle) << ","
          << format_float(losses.adv_d) << "," << format_float(losses.adv_g) << "\n";
    }
    state.epoch = epoch;
    const fs::path ckpt = fs::path(cfg.out_dir) / checkpoint_manifest_name(epoch);
    save_gan_checkpoint(state, ckpt.string());
    result.checkpoints.push_back(ckpt.string());
  }
  log.flush();
  result.loss_log = log_path.string();
  result.iterations = state.iteration;
  return result;
}

}  // namespace glomseg
