#pragma once

#include <string>

#include "glomseg/nets.hpp"
#include "glomseg/tensor.hpp"

namespace glomseg {

// How the generators fight the discriminators. Minimax is the log-likelihood
// objective as written; nonsaturating flips the generator term for usable
// gradients early in training; least-squares drives sigmoided fake outputs
// toward 1.
enum class AdvMode { Minimax, NonSaturating, LeastSquares };

AdvMode adv_mode_from_string(const std::string& name);
std::string to_string(AdvMode mode);

// mean||G(F(x)) - x||_1 + mean||F(G(y)) - y||_1
Tensor cycle_loss(const Tensor& x, const Tensor& y, const ResnetGenerator& f,
                  const ResnetGenerator& g);

// Log-likelihood objective over sigmoided patch maps (patch positions average
// as samples of the expectation, logs clamped at log(1e-7)):
//   E[log Dx(x)] + E[log(1 - Dy(F(x)))] + E[log(1 - Dx(G(y)))] + E[log Dy(y)]
// The discriminators maximize this; fake inputs are passed in so the caller
// controls whether generator gradients flow.
Tensor discriminator_objective(const Tensor& x, const Tensor& y, const Tensor& fake_x,
                               const Tensor& fake_y, const PatchDiscriminator& d_x,
                               const PatchDiscriminator& d_y);

// The quantity F and G descend on, per mode.
Tensor generator_objective(const Tensor& x, const Tensor& y, const Tensor& fake_x,
                           const Tensor& fake_y, const PatchDiscriminator& d_x,
                           const PatchDiscriminator& d_y, AdvMode mode);

struct AdvLosses {
  Tensor for_discriminators;  // maximized by D_X, D_Y
  Tensor for_generators;      // minimized by F, G
};

// Convenience wrapper computing fake_y = F(x), fake_x = G(y) internally.
AdvLosses adversarial_loss(const Tensor& x, const Tensor& y, const ResnetGenerator& f,
                           const ResnetGenerator& g, const PatchDiscriminator& d_x,
                           const PatchDiscriminator& d_y, AdvMode mode = AdvMode::Minimax);

}  // namespace glomseg
