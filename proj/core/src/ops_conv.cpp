#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "glomseg/graph.hpp"
#include "glomseg/ops.hpp"

namespace glomseg {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

bool should_record(bool any_requires_grad) {
  return any_requires_grad && Graph::active() != nullptr;
}

// Unfold one image (C, H, W) into a (C*k*k) x (Ho*Wo) patch matrix.
// Out-of-bounds taps read as zero (zero padding only).
void im2col(const float* src, int c_in, int h, int w, int k, int stride, int pad, int ho, int wo,
            float* cols) {
  const int n_sp = ho * wo;
  for (int c = 0; c < c_in; ++c) {
    const float* plane = src + static_cast<std::size_t>(c) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        float* row = cols + (static_cast<std::size_t>(c) * k * k + ki * k + kj) * n_sp;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ki;
          float* dst = row + static_cast<std::size_t>(oy) * wo;
          if (iy < 0 || iy >= h) {
            for (int ox = 0; ox < wo; ++ox) dst[ox] = 0.0f;
            continue;
          }
          const float* src_row = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kj;
            dst[ox] = (ix >= 0 && ix < w) ? src_row[ix] : 0.0f;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add the patch matrix back into a (C, H, W) image.
void col2im(const float* cols, int c_in, int h, int w, int k, int stride, int pad, int ho, int wo,
            float* dst) {
  const int n_sp = ho * wo;
  for (int c = 0; c < c_in; ++c) {
    float* plane = dst + static_cast<std::size_t>(c) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const float* row = cols + (static_cast<std::size_t>(c) * k * k + ki * k + kj) * n_sp;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= h) continue;
          float* dst_row = plane + static_cast<std::size_t>(iy) * w;
          const float* src_row = row + static_cast<std::size_t>(oy) * wo;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kj;
            if (ix >= 0 && ix < w) dst_row[ix] += src_row[ox];
          }
        }
      }
    }
  }
}

struct ConvDims {
  int batch, c_in, h, w;      // input
  int c_out, k;               // weight
  int ho, wo;                 // output
  int n_sp;                   // ho * wo
  std::size_t cols_size;      // (c_in*k*k) * n_sp
};

ConvDims check_conv_args(const Tensor& input, const Tensor& weight, int stride, int padding,
                         const char* op) {
  const Shape& is = input.shape();
  const Shape& ws = weight.shape();
  if (ws.h != ws.w) {
    throw std::invalid_argument(std::string(op) + ": kernel must be square, got " + ws.str());
  }
  if (stride < 1) throw std::invalid_argument(std::string(op) + ": stride must be >= 1");
  if (padding < 0) throw std::invalid_argument(std::string(op) + ": padding must be >= 0");
  ConvDims d;
  d.batch = is.n;
  d.c_in = is.c;
  d.h = is.h;
  d.w = is.w;
  d.k = ws.h;
  return d;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding) {
  ConvDims d = check_conv_args(input, weight, stride, padding, "conv2d");
  const Shape& ws = weight.shape();
  d.c_out = ws.n;
  if (ws.c != d.c_in) {
    throw std::invalid_argument("conv2d: input channels " + std::to_string(d.c_in) +
                                " do not match weight " + ws.str());
  }
  if (!(bias.shape() == Shape{1, d.c_out, 1, 1})) {
    throw std::invalid_argument("conv2d: bias must be (1," + std::to_string(d.c_out) +
                                ",1,1), got " + bias.shape().str());
  }
  d.ho = (d.h + 2 * padding - d.k) / stride + 1;
  d.wo = (d.w + 2 * padding - d.k) / stride + 1;
  if (d.h + 2 * padding < d.k || d.w + 2 * padding < d.k || d.ho < 1 || d.wo < 1) {
    throw std::invalid_argument("conv2d: kernel " + std::to_string(d.k) +
                                " does not fit input " + input.shape().str() + " with padding " +
                                std::to_string(padding));
  }
  d.n_sp = d.ho * d.wo;
  const int kk = d.c_in * d.k * d.k;
  d.cols_size = static_cast<std::size_t>(kk) * d.n_sp;

  const bool rg = input.requires_grad() || weight.requires_grad() || bias.requires_grad();
  Tensor out = Tensor::zeros(Shape{d.batch, d.c_out, d.ho, d.wo}, rg);

  std::vector<float> cols(d.cols_size);
  MapConstMat w_mat(weight.values().data(), d.c_out, kk);
  for (int n = 0; n < d.batch; ++n) {
    const float* src = input.values().data() + static_cast<std::size_t>(n) * d.c_in * d.h * d.w;
    im2col(src, d.c_in, d.h, d.w, d.k, stride, padding, d.ho, d.wo, cols.data());
    MapConstMat col_mat(cols.data(), kk, d.n_sp);
    MapMat out_mat(out.values().data() + static_cast<std::size_t>(n) * d.c_out * d.n_sp, d.c_out,
                   d.n_sp);
    out_mat.noalias() = w_mat * col_mat;
    for (int co = 0; co < d.c_out; ++co) out_mat.row(co).array() += bias.values()[co];
  }
  debug_check_finite(out, "conv2d");

  if (should_record(rg)) {
    Graph::record(out, [input = input, weight = weight, bias = bias, out = out, d, stride, padding]() mutable {
      const int kk = d.c_in * d.k * d.k;
      std::vector<float> cols(d.cols_size);
      MapConstMat w_mat(weight.values().data(), d.c_out, kk);
      if (input.requires_grad()) input.ensure_grad();
      if (weight.requires_grad()) weight.ensure_grad();
      if (bias.requires_grad()) bias.ensure_grad();
      std::vector<float> gcols;
      if (input.requires_grad()) gcols.resize(d.cols_size);
      for (int n = 0; n < d.batch; ++n) {
        MapConstMat g_mat(out.grad().data() + static_cast<std::size_t>(n) * d.c_out * d.n_sp,
                          d.c_out, d.n_sp);
        if (bias.requires_grad()) {
          auto gb = bias.grad();
          for (int co = 0; co < d.c_out; ++co) gb[co] += g_mat.row(co).sum();
        }
        if (weight.requires_grad()) {
          const float* src =
              input.values().data() + static_cast<std::size_t>(n) * d.c_in * d.h * d.w;
          im2col(src, d.c_in, d.h, d.w, d.k, stride, padding, d.ho, d.wo, cols.data());
          MapConstMat col_mat(cols.data(), kk, d.n_sp);
          MapMat gw_mat(weight.grad().data(), d.c_out, kk);
          gw_mat.noalias() += g_mat * col_mat.transpose();
        }
        if (input.requires_grad()) {
          MapMat gcol_mat(gcols.data(), kk, d.n_sp);
          gcol_mat.noalias() = w_mat.transpose() * g_mat;
          float* gx = input.grad().data() + static_cast<std::size_t>(n) * d.c_in * d.h * d.w;
          col2im(gcols.data(), d.c_in, d.h, d.w, d.k, stride, padding, d.ho, d.wo, gx);
        }
      }
    });
  }
  return out;
}

Tensor conv2d_transpose(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
                        int padding) {
  ConvDims d = check_conv_args(input, weight, stride, padding, "conv2d_transpose");
  // weight (C_in, C_out, k, k): the same tensor conv2d would use to map the
  // output of this op back to its input (adjointness).
  const Shape& ws = weight.shape();
  if (ws.n != d.c_in) {
    throw std::invalid_argument("conv2d_transpose: input channels " + std::to_string(d.c_in) +
                                " do not match weight " + ws.str());
  }
  d.c_out = ws.c;
  if (!(bias.shape() == Shape{1, d.c_out, 1, 1})) {
    throw std::invalid_argument("conv2d_transpose: bias must be (1," + std::to_string(d.c_out) +
                                ",1,1), got " + bias.shape().str());
  }
  const int h_out = (d.h - 1) * stride - 2 * padding + d.k;
  const int w_out = (d.w - 1) * stride - 2 * padding + d.k;
  if (h_out < 1 || w_out < 1) {
    throw std::invalid_argument("conv2d_transpose: output would be empty for input " +
                                input.shape().str());
  }
  d.n_sp = d.h * d.w;  // the "conv output" grid is this op's input grid
  const int kk = d.c_out * d.k * d.k;
  d.cols_size = static_cast<std::size_t>(kk) * d.n_sp;

  const bool rg = input.requires_grad() || weight.requires_grad() || bias.requires_grad();
  Tensor out = Tensor::zeros(Shape{d.batch, d.c_out, h_out, w_out}, rg);

  std::vector<float> cols(d.cols_size);
  MapConstMat w_mat(weight.values().data(), d.c_in, kk);
  for (int n = 0; n < d.batch; ++n) {
    MapConstMat in_mat(input.values().data() + static_cast<std::size_t>(n) * d.c_in * d.n_sp,
                       d.c_in, d.n_sp);
    MapMat col_mat(cols.data(), kk, d.n_sp);
    col_mat.noalias() = w_mat.transpose() * in_mat;
    float* dst = out.values().data() + static_cast<std::size_t>(n) * d.c_out * h_out * w_out;
    col2im(cols.data(), d.c_out, h_out, w_out, d.k, stride, padding, d.h, d.w, dst);
  }
  for (int n = 0; n < d.batch; ++n) {
    float* dst = out.values().data() + static_cast<std::size_t>(n) * d.c_out * h_out * w_out;
    for (int co = 0; co < d.c_out; ++co) {
      const float b = bias.values()[co];
      float* plane = dst + static_cast<std::size_t>(co) * h_out * w_out;
      for (int i = 0; i < h_out * w_out; ++i) plane[i] += b;
    }
  }
  debug_check_finite(out, "conv2d_transpose");

  if (should_record(rg)) {
    Graph::record(out, [input = input, weight = weight, bias = bias, out = out, d, stride, padding, h_out, w_out]() mutable {
      const int kk = d.c_out * d.k * d.k;
      std::vector<float> gcols(d.cols_size);
      MapConstMat w_mat(weight.values().data(), d.c_in, kk);
      if (input.requires_grad()) input.ensure_grad();
      if (weight.requires_grad()) weight.ensure_grad();
      if (bias.requires_grad()) bias.ensure_grad();
      for (int n = 0; n < d.batch; ++n) {
        const float* g = out.grad().data() + static_cast<std::size_t>(n) * d.c_out * h_out * w_out;
        if (bias.requires_grad()) {
          auto gb = bias.grad();
          for (int co = 0; co < d.c_out; ++co) {
            const float* plane = g + static_cast<std::size_t>(co) * h_out * w_out;
            double acc = 0.0;
            for (int i = 0; i < h_out * w_out; ++i) acc += plane[i];
            gb[co] += static_cast<float>(acc);
          }
        }
        // grad wrt input is conv2d of the output gradient with the same weight
        im2col(g, d.c_out, h_out, w_out, d.k, stride, padding, d.h, d.w, gcols.data());
        MapConstMat gcol_mat(gcols.data(), kk, d.n_sp);
        if (input.requires_grad()) {
          MapMat gx_mat(input.grad().data() + static_cast<std::size_t>(n) * d.c_in * d.n_sp,
                        d.c_in, d.n_sp);
          gx_mat.noalias() += w_mat * gcol_mat;
        }
        if (weight.requires_grad()) {
          MapConstMat in_mat(input.values().data() + static_cast<std::size_t>(n) * d.c_in * d.n_sp,
                             d.c_in, d.n_sp);
          MapMat gw_mat(weight.grad().data(), d.c_in, kk);
          gw_mat.noalias() += in_mat * gcol_mat.transpose();
        }
      }
    });
  }
  return out;
}

Tensor instance_norm(const Tensor& input, const Tensor& gain, const Tensor& offset, float eps) {
  const Shape& is = input.shape();
  if (eps <= 0.0f) throw std::invalid_argument("instance_norm: eps must be positive");
  const Shape want{1, is.c, 1, 1};
  if (!(gain.shape() == want) || !(offset.shape() == want)) {
    throw std::invalid_argument("instance_norm: gain/offset must be " + want.str() + ", got " +
                                gain.shape().str() + " and " + offset.shape().str());
  }
  const bool rg = input.requires_grad() || gain.requires_grad() || offset.requires_grad();
  Tensor out = Tensor::zeros(is, rg);
  // Saved for backward: normalized values and per-plane 1/std.
  Tensor xhat = Tensor::zeros(is);
  std::vector<float> inv_std(static_cast<std::size_t>(is.n) * is.c);

  const int plane = is.h * is.w;
  for (int n = 0; n < is.n; ++n) {
    for (int c = 0; c < is.c; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * is.c + c) * plane;
      const float* x = input.values().data() + base;
      double sum = 0.0, sum_sq = 0.0;
      for (int i = 0; i < plane; ++i) {
        sum += x[i];
        sum_sq += double(x[i]) * x[i];
      }
      const double mean = sum / plane;
      const double var = sum_sq / plane - mean * mean;
      const float inv = static_cast<float>(1.0 / std::sqrt(std::max(var, 0.0) + eps));
      inv_std[static_cast<std::size_t>(n) * is.c + c] = inv;
      float* xh = xhat.values().data() + base;
      float* y = out.values().data() + base;
      const float g = gain.values()[c];
      const float b = offset.values()[c];
      const float m = static_cast<float>(mean);
      for (int i = 0; i < plane; ++i) {
        xh[i] = (x[i] - m) * inv;
        y[i] = g * xh[i] + b;
      }
    }
  }
  debug_check_finite(out, "instance_norm");

  if (should_record(rg)) {
    Graph::record(out, [input = input, gain = gain, offset = offset, out = out, xhat = xhat, inv_std = std::move(inv_std)]() mutable {
      const Shape& is = input.shape();
      const int plane = is.h * is.w;
      if (input.requires_grad()) input.ensure_grad();
      if (gain.requires_grad()) gain.ensure_grad();
      if (offset.requires_grad()) offset.ensure_grad();
      for (int n = 0; n < is.n; ++n) {
        for (int c = 0; c < is.c; ++c) {
          const std::size_t base = (static_cast<std::size_t>(n) * is.c + c) * plane;
          const float* go = out.grad().data() + base;
          const float* xh = xhat.values().data() + base;
          if (offset.requires_grad()) {
            double acc = 0.0;
            for (int i = 0; i < plane; ++i) acc += go[i];
            offset.grad()[c] += static_cast<float>(acc);
          }
          if (gain.requires_grad()) {
            double acc = 0.0;
            for (int i = 0; i < plane; ++i) acc += double(go[i]) * xh[i];
            gain.grad()[c] += static_cast<float>(acc);
          }
          if (input.requires_grad()) {
            const float g = gain.values()[c];
            const float inv = inv_std[static_cast<std::size_t>(n) * is.c + c];
            double sum_d = 0.0, sum_dx = 0.0;
            for (int i = 0; i < plane; ++i) {
              const double dxh = double(go[i]) * g;
              sum_d += dxh;
              sum_dx += dxh * xh[i];
            }
            const float mean_d = static_cast<float>(sum_d / plane);
            const float mean_dx = static_cast<float>(sum_dx / plane);
            float* gx = input.grad().data() + base;
            for (int i = 0; i < plane; ++i) {
              const float dxh = go[i] * g;
              gx[i] += inv * (dxh - mean_d - xh[i] * mean_dx);
            }
          }
        }
      }
    });
  }
  return out;
}

}  // namespace glomseg
