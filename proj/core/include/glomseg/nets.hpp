#pragma once

#include <string>
#include <utility>
#include <vector>

#include "glomseg/rng.hpp"
#include "glomseg/tensor.hpp"

namespace glomseg {

// Translation-network topology. The generator keeps spatial size (stride-2
// encoder, residual trunk, stride-2 transposed decoder); the discriminator
// emits an h' x w' patch map of raw logits, not a scalar.
struct NetSpec {
  int gen_width = 16;
  int n_res_blocks = 4;
  int down_depth = 2;
  int disc_width = 16;
  int disc_layers = 3;
  int c_x = 3;  // image domain channels
  int c_y = 1;  // label domain channels (1 single-class, 2 multi-class)

  void validate() const;
};

struct ConvLayer {
  Tensor weight, bias;
  int stride = 1, padding = 0;
};
struct NormLayer {
  Tensor gain, offset;
};
struct ResBlock {
  ConvLayer conv1, conv2;
  NormLayer norm1, norm2;
};

class ResnetGenerator {
 public:
  ResnetGenerator() = default;
  ResnetGenerator(int in_channels, int out_channels, const NetSpec& spec, Rng& rng);

  Tensor forward(const Tensor& x) const;
  std::vector<std::pair<std::string, Tensor>> named_params() const;
  std::vector<Tensor> params() const;
  int in_channels() const { return in_channels_; }
  int out_channels() const { return out_channels_; }

 private:
  ConvLayer head_;
  NormLayer head_norm_;
  std::vector<ConvLayer> down_;
  std::vector<NormLayer> down_norm_;
  std::vector<ResBlock> blocks_;
  std::vector<ConvLayer> up_;  // transposed convs
  std::vector<NormLayer> up_norm_;
  ConvLayer tail_;
  int in_channels_ = 0, out_channels_ = 0, down_depth_ = 0;
};

class PatchDiscriminator {
 public:
  PatchDiscriminator() = default;
  PatchDiscriminator(int in_channels, const NetSpec& spec, Rng& rng);

  // Raw patch-map logits; sigmoid is applied by the loss.
  Tensor forward(const Tensor& x) const;
  std::vector<std::pair<std::string, Tensor>> named_params() const;
  std::vector<Tensor> params() const;
  int in_channels() const { return in_channels_; }

 private:
  std::vector<ConvLayer> convs_;
  std::vector<NormLayer> norms_;  // norms_[i] pairs with convs_[i+1]
  ConvLayer final_;
  int in_channels_ = 0;
};

void zero_grads(const std::vector<Tensor>& params);
void clear_grads(const std::vector<Tensor>& params);

}  // namespace glomseg
