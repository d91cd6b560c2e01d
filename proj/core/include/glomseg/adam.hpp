#pragma once

#include <cstdint>
#include <vector>

#include "glomseg/tensor.hpp"

namespace glomseg {

// Adam with bias correction. One state owns the first/second moment arrays for
// a fixed list of parameter tensors; the step counter increments by exactly 1
// per step. Betas follow the reference translation setup (beta1 = 0.5).
struct AdamState {
  float lr = 2e-4f;
  float beta1 = 0.5f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  std::int64_t t = 0;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;

  void init(const std::vector<Tensor>& params);
  bool initialized() const { return !m.empty(); }
};

// One update over all parameters, reading each tensor's current gradient.
// Parameters whose gradient is absent are treated as zero-gradient (skipped by
// the moment decay would be wrong, so moments still decay).
void adam_step(std::vector<Tensor>& params, AdamState& state);

}  // namespace glomseg
