#include <cmath>
#include <stdexcept>
#include <string>

#include "glomseg/graph.hpp"
#include "glomseg/ops.hpp"

namespace glomseg {

namespace {

bool should_record(bool any_requires_grad) {
  return any_requires_grad && Graph::active() != nullptr;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                                b.shape().str());
  }
}

}  // namespace

Tensor relu(const Tensor& t) {
  Tensor out = Tensor::zeros(t.shape(), t.requires_grad());
  auto in = t.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) ov[i] = in[i] > 0.0f ? in[i] : 0.0f;
  debug_check_finite(out, "relu");
  if (should_record(t.requires_grad())) {
    Graph::record(out, [t = t, out = out]() mutable {
      if (!t.requires_grad()) return;
      t.ensure_grad();
      auto g = t.grad();
      auto og = out.grad();
      auto in = t.values();
      for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] > 0.0f) g[i] += og[i];
      }
    });
  }
  return out;
}

Tensor leaky_relu(const Tensor& t, float slope) {
  Tensor out = Tensor::zeros(t.shape(), t.requires_grad());
  auto in = t.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) ov[i] = in[i] > 0.0f ? in[i] : slope * in[i];
  debug_check_finite(out, "leaky_relu");
  if (should_record(t.requires_grad())) {
    Graph::record(out, [t = t, out = out, slope]() mutable {
      if (!t.requires_grad()) return;
      t.ensure_grad();
      auto g = t.grad();
      auto og = out.grad();
      auto in = t.values();
      for (std::size_t i = 0; i < in.size(); ++i) {
        g[i] += (in[i] > 0.0f ? 1.0f : slope) * og[i];
      }
    });
  }
  return out;
}

Tensor tanh(const Tensor& t) {
  Tensor out = Tensor::zeros(t.shape(), t.requires_grad());
  auto in = t.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) ov[i] = std::tanh(in[i]);
  debug_check_finite(out, "tanh");
  if (should_record(t.requires_grad())) {
    Graph::record(out, [t = t, out = out]() mutable {
      if (!t.requires_grad()) return;
      t.ensure_grad();
      auto g = t.grad();
      auto og = out.grad();
      auto y = out.values();
      for (std::size_t i = 0; i < y.size(); ++i) g[i] += (1.0f - y[i] * y[i]) * og[i];
    });
  }
  return out;
}

Tensor sigmoid(const Tensor& t) {
  Tensor out = Tensor::zeros(t.shape(), t.requires_grad());
  auto in = t.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const float x = in[i];
    if (x >= 0.0f) {
      ov[i] = 1.0f / (1.0f + std::exp(-x));
    } else {
      const float e = std::exp(x);
      ov[i] = e / (1.0f + e);
    }
  }
  debug_check_finite(out, "sigmoid");
  if (should_record(t.requires_grad())) {
    Graph::record(out, [t = t, out = out]() mutable {
      if (!t.requires_grad()) return;
      t.ensure_grad();
      auto g = t.grad();
      auto og = out.grad();
      auto y = out.values();
      for (std::size_t i = 0; i < y.size(); ++i) g[i] += y[i] * (1.0f - y[i]) * og[i];
    });
  }
  return out;
}

Tensor l1_mean(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "l1_mean");
  auto av = a.values();
  auto bv = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += std::abs(double(av[i]) - double(bv[i]));
  const double n = static_cast<double>(av.size());
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = Tensor::from_vector(Shape{1, 1, 1, 1}, {static_cast<float>(acc / n)});
  out.set_requires_grad(rg);
  debug_check_finite(out, "l1_mean");
  if (should_record(rg)) {
    Graph::record(out, [a = a, b = b, out = out, n]() mutable {
      const float go = out.grad()[0];
      auto av = a.values();
      auto bv = b.values();
      const float inv_n = static_cast<float>(1.0 / n);
      if (a.requires_grad()) a.ensure_grad();
      if (b.requires_grad()) b.ensure_grad();
      for (std::size_t i = 0; i < av.size(); ++i) {
        const float d = av[i] - bv[i];
        const float s = d > 0.0f ? 1.0f : (d < 0.0f ? -1.0f : 0.0f);
        if (a.requires_grad()) a.grad()[i] += s * inv_n * go;
        if (b.requires_grad()) b.grad()[i] -= s * inv_n * go;
      }
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = Tensor::zeros(a.shape(), rg);
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < av.size(); ++i) ov[i] = av[i] + bv[i];
  debug_check_finite(out, "add");
  if (should_record(rg)) {
    Graph::record(out, [a = a, b = b, out = out]() mutable {
      auto og = out.grad();
      if (a.requires_grad()) {
        a.ensure_grad();
        auto g = a.grad();
        for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i];
      }
      if (b.requires_grad()) {
        b.ensure_grad();
        auto g = b.grad();
        for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i];
      }
    });
  }
  return out;
}

Tensor affine(const Tensor& t, float scale, float shift) {
  Tensor out = Tensor::zeros(t.shape(), t.requires_grad());
  auto in = t.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) ov[i] = scale * in[i] + shift;
  debug_check_finite(out, "affine");
  if (should_record(t.requires_grad())) {
    Graph::record(out, [t = t, out = out, scale]() mutable {
      t.ensure_grad();
      auto g = t.grad();
      auto og = out.grad();
      for (std::size_t i = 0; i < og.size(); ++i) g[i] += scale * og[i];
    });
  }
  return out;
}

Tensor sum_all(const Tensor& t) {
  auto in = t.values();
  double acc = 0.0;
  for (float v : in) acc += v;
  Tensor out = Tensor::from_vector(Shape{1, 1, 1, 1}, {static_cast<float>(acc)});
  out.set_requires_grad(t.requires_grad());
  debug_check_finite(out, "sum_all");
  if (should_record(t.requires_grad())) {
    Graph::record(out, [t = t, out = out]() mutable {
      t.ensure_grad();
      auto g = t.grad();
      const float go = out.grad()[0];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += go;
    });
  }
  return out;
}

Tensor mean_all(const Tensor& t) {
  auto in = t.values();
  double acc = 0.0;
  for (float v : in) acc += v;
  const double n = static_cast<double>(in.size());
  Tensor out = Tensor::from_vector(Shape{1, 1, 1, 1}, {static_cast<float>(acc / n)});
  out.set_requires_grad(t.requires_grad());
  debug_check_finite(out, "mean_all");
  if (should_record(t.requires_grad())) {
    Graph::record(out, [t = t, out = out, n]() mutable {
      t.ensure_grad();
      auto g = t.grad();
      const float go = out.grad()[0] * static_cast<float>(1.0 / n);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += go;
    });
  }
  return out;
}

Tensor log_clamped(const Tensor& t, float floor_value) {
  if (floor_value <= 0.0f) {
    throw std::invalid_argument("log_clamped: floor must be positive");
  }
  Tensor out = Tensor::zeros(t.shape(), t.requires_grad());
  auto in = t.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    ov[i] = std::log(in[i] > floor_value ? in[i] : floor_value);
  }
  debug_check_finite(out, "log_clamped");
  if (should_record(t.requires_grad())) {
    Graph::record(out, [t = t, out = out, floor_value]() mutable {
      t.ensure_grad();
      auto g = t.grad();
      auto og = out.grad();
      auto in = t.values();
      for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] >= floor_value) g[i] += og[i] / in[i];
      }
    });
  }
  return out;
}

Tensor mean_sq_diff(const Tensor& t, float target) {
  auto in = t.values();
  double acc = 0.0;
  for (float v : in) {
    const double d = double(v) - double(target);
    acc += d * d;
  }
  const double n = static_cast<double>(in.size());
  Tensor out = Tensor::from_vector(Shape{1, 1, 1, 1}, {static_cast<float>(acc / n)});
  out.set_requires_grad(t.requires_grad());
  debug_check_finite(out, "mean_sq_diff");
  if (should_record(t.requires_grad())) {
    Graph::record(out, [t = t, out = out, target, n]() mutable {
      t.ensure_grad();
      auto g = t.grad();
      auto in = t.values();
      const float go = out.grad()[0];
      const float scale = static_cast<float>(2.0 / n);
      for (std::size_t i = 0; i < in.size(); ++i) g[i] += scale * (in[i] - target) * go;
    });
  }
  return out;
}

}  // namespace glomseg
