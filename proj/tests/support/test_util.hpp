#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "glomseg/rng.hpp"
#include "glomseg/tensor.hpp"
#include "support/ref_ops.hpp"

namespace testutil {

// Random tensor with entries bounded away from activation kinks.
inline glomseg::Tensor random_tensor(glomseg::Shape s, glomseg::Rng& rng, double lo = -1.0,
                                     double hi = 1.0, bool requires_grad = false,
                                     double avoid_zero_band = 0.0) {
  glomseg::Tensor t = glomseg::Tensor::zeros(s, requires_grad);
  for (float& v : t.values()) {
    double x = rng.uniform(lo, hi);
    if (avoid_zero_band > 0.0 && std::abs(x) < avoid_zero_band) {
      x = x >= 0.0 ? x + avoid_zero_band : x - avoid_zero_band;
    }
    v = static_cast<float>(x);
  }
  return t;
}

inline refops::Vec to_vec(const glomseg::Tensor& t) {
  return refops::Vec(t.values().begin(), t.values().end());
}

inline refops::Dims to_dims(const glomseg::Tensor& t) {
  const glomseg::Shape s = t.shape();
  return refops::Dims{s.n, s.c, s.h, s.w};
}

// Per-tensor relative error: max |a-f| normalized by the largest gradient
// magnitude present (floored to dodge 0/0 on all-zero gradients).
inline double max_rel_error(const std::vector<float>& analytic, const refops::Vec& fd) {
  double scale = 1e-6;
  for (float a : analytic) scale = std::max(scale, double(std::abs(a)));
  for (double f : fd) scale = std::max(scale, std::abs(f));
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, std::abs(double(analytic[i]) - fd[i]) / scale);
  }
  return worst;
}

// Central finite differences of a double-precision scalar function over one
// input vector.
template <typename F>
refops::Vec finite_diff(refops::Vec at_point, F&& eval, double h = 1e-3) {
  refops::Vec grads(at_point.size());
  for (std::size_t i = 0; i < at_point.size(); ++i) {
    const double saved = at_point[i];
    at_point[i] = saved + h;
    const double up = eval(at_point);
    at_point[i] = saved - h;
    const double down = eval(at_point);
    at_point[i] = saved;
    grads[i] = (up - down) / (2.0 * h);
  }
  return grads;
}

}  // namespace testutil
