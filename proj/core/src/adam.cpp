#include "glomseg/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace glomseg {

void AdamState::init(const std::vector<Tensor>& params) {
  m.clear();
  v.clear();
  t = 0;
  m.reserve(params.size());
  v.reserve(params.size());
  for (const Tensor& p : params) {
    m.emplace_back(p.numel(), 0.0f);
    v.emplace_back(p.numel(), 0.0f);
  }
}

void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (!state.initialized()) {
    std::vector<Tensor> copy(params.begin(), params.end());
    state.init(copy);
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: state holds " + std::to_string(state.m.size()) +
                                " moment arrays for " + std::to_string(params.size()) +
                                " parameters");
  }
  state.t += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = params[pi];
    if (state.m[pi].size() != static_cast<std::size_t>(p.numel())) {
      throw std::invalid_argument("adam_step: moment shape mismatch for parameter " +
                                  std::to_string(pi));
    }
    auto vals = p.values();
    const bool have_grad = p.has_grad();
    std::span<const float> g;
    if (have_grad) g = p.grad();
    float* mp = state.m[pi].data();
    float* vp = state.v[pi].data();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double gi = have_grad ? g[i] : 0.0;
      const double mi = b1 * mp[i] + (1.0 - b1) * gi;
      const double vi = b2 * vp[i] + (1.0 - b2) * gi * gi;
      mp[i] = static_cast<float>(mi);
      vp[i] = static_cast<float>(vi);
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      vals[i] = static_cast<float>(vals[i] - state.lr * m_hat / (std::sqrt(v_hat) + state.eps));
    }
  }
}

}  // namespace glomseg
