#pragma once

// Independent double-precision reference implementations used as oracles for
// the float32 engine: direct nested loops, no shared code with the production
// ops. Also hosts the finite-difference harness and double mirrors of the two
// network topologies.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "glomseg/nets.hpp"
#include "glomseg/tensor.hpp"

namespace refops {

struct Dims {
  int n = 1, c = 1, h = 1, w = 1;
  std::int64_t numel() const { return std::int64_t(n) * c * h * w; }
};

using Vec = std::vector<double>;

inline double& at(Vec& v, const Dims& d, int n, int c, int y, int x) {
  return v[((std::size_t(n) * d.c + c) * d.h + y) * d.w + x];
}
inline double at(const Vec& v, const Dims& d, int n, int c, int y, int x) {
  return v[((std::size_t(n) * d.c + c) * d.h + y) * d.w + x];
}

// Six nested loops, the slowest clearest form.
inline Vec conv2d(const Vec& x, const Dims& xd, const Vec& w, const Dims& wd, const Vec& bias,
                  int stride, int pad, Dims& out_dims) {
  const int ho = (xd.h + 2 * pad - wd.h) / stride + 1;
  const int wo = (xd.w + 2 * pad - wd.w) / stride + 1;
  out_dims = Dims{xd.n, wd.n, ho, wo};
  Vec out(out_dims.numel(), 0.0);
  for (int n = 0; n < xd.n; ++n) {
    for (int co = 0; co < wd.n; ++co) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          double acc = bias[co];
          for (int ci = 0; ci < xd.c; ++ci) {
            for (int ky = 0; ky < wd.h; ++ky) {
              for (int kx = 0; kx < wd.w; ++kx) {
                const int iy = oy * stride - pad + ky;
                const int ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= xd.h || ix < 0 || ix >= xd.w) continue;
                acc += at(x, xd, n, ci, iy, ix) * at(w, wd, co, ci, ky, kx);
              }
            }
          }
          at(out, out_dims, n, co, oy, ox) = acc;
        }
      }
    }
  }
  return out;
}

// Direct scatter-add; weight (c_in, c_out, k, k).
inline Vec conv2d_transpose(const Vec& x, const Dims& xd, const Vec& w, const Dims& wd,
                            const Vec& bias, int stride, int pad, Dims& out_dims) {
  const int ho = (xd.h - 1) * stride - 2 * pad + wd.h;
  const int wo = (xd.w - 1) * stride - 2 * pad + wd.w;
  out_dims = Dims{xd.n, wd.c, ho, wo};
  Vec out(out_dims.numel(), 0.0);
  for (int n = 0; n < xd.n; ++n) {
    for (int co = 0; co < wd.c; ++co) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          at(out, out_dims, n, co, oy, ox) = bias[co];
        }
      }
    }
    for (int ci = 0; ci < xd.c; ++ci) {
      for (int iy = 0; iy < xd.h; ++iy) {
        for (int ix = 0; ix < xd.w; ++ix) {
          const double v = at(x, xd, n, ci, iy, ix);
          for (int co = 0; co < wd.c; ++co) {
            for (int ky = 0; ky < wd.h; ++ky) {
              for (int kx = 0; kx < wd.w; ++kx) {
                const int oy = iy * stride - pad + ky;
                const int ox = ix * stride - pad + kx;
                if (oy < 0 || oy >= ho || ox < 0 || ox >= wo) continue;
                at(out, out_dims, n, co, oy, ox) += v * at(w, wd, ci, co, ky, kx);
              }
            }
          }
        }
      }
    }
  }
  return out;
}

inline Vec instance_norm(const Vec& x, const Dims& xd, const Vec& gain, const Vec& offset,
                         double eps = 1e-5) {
  Vec out(x.size());
  const int plane = xd.h * xd.w;
  for (int n = 0; n < xd.n; ++n) {
    for (int c = 0; c < xd.c; ++c) {
      double sum = 0.0, sum_sq = 0.0;
      for (int y = 0; y < xd.h; ++y) {
        for (int xx = 0; xx < xd.w; ++xx) {
          const double v = at(x, xd, n, c, y, xx);
          sum += v;
          sum_sq += v * v;
        }
      }
      const double mean = sum / plane;
      const double var = std::max(0.0, sum_sq / plane - mean * mean);
      const double inv = 1.0 / std::sqrt(var + eps);
      for (int y = 0; y < xd.h; ++y) {
        for (int xx = 0; xx < xd.w; ++xx) {
          const std::size_t idx = ((std::size_t(n) * xd.c + c) * xd.h + y) * xd.w + xx;
          out[idx] = gain[c] * ((x[idx] - mean) * inv) + offset[c];
        }
      }
    }
  }
  return out;
}

inline Vec relu(Vec v) {
  for (double& x : v) x = x > 0 ? x : 0;
  return v;
}
inline Vec leaky_relu(Vec v, double slope) {
  for (double& x : v) x = x > 0 ? x : slope * x;
  return v;
}
inline Vec tanh(Vec v) {
  for (double& x : v) x = std::tanh(x);
  return v;
}
inline Vec sigmoid(Vec v) {
  for (double& x : v) x = 1.0 / (1.0 + std::exp(-x));
  return v;
}
inline Vec add(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline double l1_mean(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / double(a.size());
}

inline double mean(const Vec& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / double(v.size());
}

inline double mean_log_clamped(const Vec& v, double floor_value = 1e-7) {
  double acc = 0.0;
  for (double x : v) acc += std::log(std::max(x, floor_value));
  return acc / double(v.size());
}

// ---------------------------------------------------------------------------
// Double mirrors of the production topologies, keyed by parameter name. These
// re-derive the forward pass from the layer recipe, so a finite-difference run
// through them is independent of the engine's conv/backward code.

struct NamedVecs {
  std::map<std::string, std::pair<Dims, Vec>> entries;

  static NamedVecs from_params(const std::vector<std::pair<std::string, glomseg::Tensor>>& params) {
    NamedVecs out;
    for (const auto& [name, t] : params) {
      const glomseg::Shape s = t.shape();
      Vec v(t.values().begin(), t.values().end());
      out.entries[name] = {Dims{s.n, s.c, s.h, s.w}, std::move(v)};
    }
    return out;
  }

  const Vec& vec(const std::string& name) const { return entries.at(name).second; }
  const Dims& dims(const std::string& name) const { return entries.at(name).first; }
  Vec& mutable_vec(const std::string& name) { return entries.at(name).second; }
};

inline Vec conv_block(const NamedVecs& p, const std::string& prefix, const Vec& x, const Dims& xd,
                      int stride, int pad, Dims& out_dims) {
  return conv2d(x, xd, p.vec(prefix + ".weight"), p.dims(prefix + ".weight"),
                p.vec(prefix + ".bias"), stride, pad, out_dims);
}

inline Vec norm_block(const NamedVecs& p, const std::string& prefix, const Vec& x, const Dims& xd) {
  return instance_norm(x, xd, p.vec(prefix + ".gain"), p.vec(prefix + ".offset"));
}

// Mirror of ResnetGenerator::forward.
inline Vec ref_generator_forward(const NamedVecs& p, const glomseg::NetSpec& spec, const Vec& x,
                                 const Dims& xd, Dims& out_dims) {
  Dims d = xd, dn;
  Vec h = relu(norm_block(p, "head_norm", conv_block(p, "head", x, d, 1, 3, dn), dn));
  d = dn;
  for (int i = 0; i < spec.down_depth; ++i) {
    const std::string pre = "down" + std::to_string(i);
    h = relu(norm_block(p, pre + "_norm", conv_block(p, pre, h, d, 2, 1, dn), dn));
    d = dn;
  }
  for (int i = 0; i < spec.n_res_blocks; ++i) {
    const std::string pre = "res" + std::to_string(i);
    Vec r = relu(norm_block(p, pre + ".norm1", conv_block(p, pre + ".conv1", h, d, 1, 1, dn), dn));
    r = norm_block(p, pre + ".norm2", conv_block(p, pre + ".conv2", r, dn, 1, 1, dn), dn);
    h = add(h, r);
  }
  for (int i = 0; i < spec.down_depth; ++i) {
    const std::string pre = "up" + std::to_string(i);
    Vec u = conv2d_transpose(h, d, p.vec(pre + ".weight"), p.dims(pre + ".weight"),
                             p.vec(pre + ".bias"), 2, 1, dn);
    h = relu(norm_block(p, pre + "_norm", u, dn));
    d = dn;
  }
  h = conv_block(p, "tail", h, d, 1, 3, out_dims);
  return tanh(h);
}

// Mirror of PatchDiscriminator::forward.
inline Vec ref_discriminator_forward(const NamedVecs& p, const glomseg::NetSpec& spec, const Vec& x,
                                     const Dims& xd, Dims& out_dims) {
  Dims d = xd, dn;
  Vec h = leaky_relu(conv_block(p, "conv0", x, d, 2, 1, dn), 0.2);
  d = dn;
  for (int i = 1; i < spec.disc_layers; ++i) {
    const std::string pre = "conv" + std::to_string(i);
    h = leaky_relu(norm_block(p, pre + "_norm", conv_block(p, pre, h, d, 2, 1, dn), dn), 0.2);
    d = dn;
  }
  return conv_block(p, "final", h, d, 1, 1, out_dims);
}

}  // namespace refops
