#pragma once

#include "glomseg/tensor.hpp"

namespace glomseg {

// The operations below are exactly the vocabulary the translation networks and
// losses are built from. All are differentiable through the recording tape;
// reductions accumulate in float64 and store float32.

// weight (C_out, C_in, k, k), bias (1, C_out, 1, 1); zero padding.
// Output spatial dims: floor((H + 2*padding - k) / stride) + 1.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride = 1,
              int padding = 0);

// Adjoint of conv2d with the same weight layout: input carries C_out channels,
// output carries C_in. Output spatial dims: (H - 1)*stride - 2*padding + k.
Tensor conv2d_transpose(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride = 1, int padding = 0);

// Per (batch, channel) plane normalization with the plane's own statistics,
// then per-channel gain/offset. gain, offset (1, C, 1, 1).
Tensor instance_norm(const Tensor& input, const Tensor& gain, const Tensor& offset,
                     float eps = 1e-5f);

Tensor relu(const Tensor& t);                            // subgradient 0 at the kink
Tensor leaky_relu(const Tensor& t, float slope = 0.2f);
Tensor tanh(const Tensor& t);
Tensor sigmoid(const Tensor& t);

// mean(|a - b|) over all elements; gradient sign(a-b)/n, 0 at exact ties.
Tensor l1_mean(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);            // elementwise, equal shapes
Tensor affine(const Tensor& t, float scale, float shift);  // scale * t + shift
Tensor sum_all(const Tensor& t);                         // scalar
Tensor mean_all(const Tensor& t);                        // scalar
Tensor log_clamped(const Tensor& t, float floor_value = 1e-7f);  // log(max(t, floor))
Tensor mean_sq_diff(const Tensor& t, float target);      // mean((t - target)^2), scalar

}  // namespace glomseg
