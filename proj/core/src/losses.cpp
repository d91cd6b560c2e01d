#include "glomseg/losses.hpp"

#include <stdexcept>

#include "glomseg/ops.hpp"

namespace glomseg {

AdvMode adv_mode_from_string(const std::string& name) {
  if (name == "minimax") return AdvMode::Minimax;
  if (name == "nonsaturating") return AdvMode::NonSaturating;
  if (name == "least-squares") return AdvMode::LeastSquares;
  throw std::invalid_argument("unknown adversarial mode '" + name +
                              "' (expected minimax, nonsaturating or least-squares)");
}

std::string to_string(AdvMode mode) {
  switch (mode) {
    case AdvMode::Minimax: return "minimax";
    case AdvMode::NonSaturating: return "nonsaturating";
    case AdvMode::LeastSquares: return "least-squares";
  }
  return "?";
}

Tensor cycle_loss(const Tensor& x, const Tensor& y, const ResnetGenerator& f,
                  const ResnetGenerator& g) {
  if (x.shape().c != f.in_channels() || y.shape().c != g.in_channels()) {
    throw std::invalid_argument("cycle_loss: channel counts do not match the generators");
  }
  const Tensor x_round = g.forward(f.forward(x));
  const Tensor y_round = f.forward(g.forward(y));
  return add(l1_mean(x_round, x), l1_mean(y_round, y));
}

namespace {

Tensor mean_log_sigmoid(const Tensor& logits) {
  return mean_all(log_clamped(sigmoid(logits)));
}

Tensor mean_log_one_minus_sigmoid(const Tensor& logits) {
  return mean_all(log_clamped(affine(sigmoid(logits), -1.0f, 1.0f)));
}

}  // namespace

Tensor discriminator_objective(const Tensor& x, const Tensor& y, const Tensor& fake_x,
                               const Tensor& fake_y, const PatchDiscriminator& d_x,
                               const PatchDiscriminator& d_y) {
  Tensor real_terms = add(mean_log_sigmoid(d_x.forward(x)), mean_log_sigmoid(d_y.forward(y)));
  Tensor fake_terms = add(mean_log_one_minus_sigmoid(d_y.forward(fake_y)),
                          mean_log_one_minus_sigmoid(d_x.forward(fake_x)));
  return add(real_terms, fake_terms);
}

Tensor generator_objective(const Tensor& x, const Tensor& y, const Tensor& fake_x,
                           const Tensor& fake_y, const PatchDiscriminator& d_x,
                           const PatchDiscriminator& d_y, AdvMode mode) {
  switch (mode) {
    case AdvMode::Minimax:
      return discriminator_objective(x, y, fake_x, fake_y, d_x, d_y);
    case AdvMode::NonSaturating: {
      Tensor t = add(mean_log_sigmoid(d_y.forward(fake_y)), mean_log_sigmoid(d_x.forward(fake_x)));
      return affine(t, -1.0f, 0.0f);
    }
    case AdvMode::LeastSquares:
      return add(mean_sq_diff(sigmoid(d_y.forward(fake_y)), 1.0f),
                 mean_sq_diff(sigmoid(d_x.forward(fake_x)), 1.0f));
  }
  throw std::logic_error("unreachable adversarial mode");
}

AdvLosses adversarial_loss(const Tensor& x, const Tensor& y, const ResnetGenerator& f,
                           const ResnetGenerator& g, const PatchDiscriminator& d_x,
                           const PatchDiscriminator& d_y, AdvMode mode) {
  const Tensor fake_y = f.forward(x);
  const Tensor fake_x = g.forward(y);
  AdvLosses out;
  out.for_discriminators = discriminator_objective(x, y, fake_x, fake_y, d_x, d_y);
  out.for_generators = generator_objective(x, y, fake_x, fake_y, d_x, d_y, mode);
  return out;
}

}  // namespace glomseg
