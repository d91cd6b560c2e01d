#include "glomseg/nets.hpp"

#include <stdexcept>

#include "glomseg/ops.hpp"

namespace glomseg {

void NetSpec::validate() const {
  if (gen_width < 1 || disc_width < 1) throw std::invalid_argument("net spec: widths must be >= 1");
  if (n_res_blocks < 1) throw std::invalid_argument("net spec: n_res_blocks must be >= 1");
  if (down_depth < 0) throw std::invalid_argument("net spec: down_depth must be >= 0");
  if (disc_layers < 1) throw std::invalid_argument("net spec: disc_layers must be >= 1");
  if (c_x < 1 || c_y < 1) throw std::invalid_argument("net spec: channel counts must be >= 1");
}

namespace {

// Reference initialization: weights N(0, 0.02), biases 0, norm gain 1, offset 0.
Tensor init_weight(Shape s, Rng& rng) {
  Tensor t = Tensor::zeros(s, true);
  for (float& v : t.values()) v = static_cast<float>(rng.normal(0.0, 0.02));
  return t;
}

ConvLayer make_conv(int c_out, int c_in, int k, int stride, int padding, Rng& rng) {
  ConvLayer l;
  l.weight = init_weight(Shape{c_out, c_in, k, k}, rng);
  l.bias = Tensor::zeros(Shape{1, c_out, 1, 1}, true);
  l.stride = stride;
  l.padding = padding;
  return l;
}

// Transposed conv weight is (c_in, c_out, k, k).
ConvLayer make_conv_transpose(int c_in, int c_out, int k, int stride, int padding, Rng& rng) {
  ConvLayer l;
  l.weight = init_weight(Shape{c_in, c_out, k, k}, rng);
  l.bias = Tensor::zeros(Shape{1, c_out, 1, 1}, true);
  l.stride = stride;
  l.padding = padding;
  return l;
}

NormLayer make_norm(int channels) {
  NormLayer n;
  n.gain = Tensor::full(Shape{1, channels, 1, 1}, 1.0f, true);
  n.offset = Tensor::zeros(Shape{1, channels, 1, 1}, true);
  return n;
}

void push_conv(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
               const ConvLayer& l) {
  out.emplace_back(prefix + ".weight", l.weight);
  out.emplace_back(prefix + ".bias", l.bias);
}

void push_norm(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
               const NormLayer& n) {
  out.emplace_back(prefix + ".gain", n.gain);
  out.emplace_back(prefix + ".offset", n.offset);
}

}  // namespace

ResnetGenerator::ResnetGenerator(int in_channels, int out_channels, const NetSpec& spec, Rng& rng)
    : in_channels_(in_channels), out_channels_(out_channels), down_depth_(spec.down_depth) {
  spec.validate();
  const int w = spec.gen_width;
  head_ = make_conv(w, in_channels, 7, 1, 3, rng);
  head_norm_ = make_norm(w);
  int ch = w;
  for (int i = 0; i < spec.down_depth; ++i) {
    down_.push_back(make_conv(ch * 2, ch, 3, 2, 1, rng));
    down_norm_.push_back(make_norm(ch * 2));
    ch *= 2;
  }
  for (int i = 0; i < spec.n_res_blocks; ++i) {
    ResBlock b;
    b.conv1 = make_conv(ch, ch, 3, 1, 1, rng);
    b.norm1 = make_norm(ch);
    b.conv2 = make_conv(ch, ch, 3, 1, 1, rng);
    b.norm2 = make_norm(ch);
    blocks_.push_back(std::move(b));
  }
  for (int i = 0; i < spec.down_depth; ++i) {
    // kernel 4, stride 2, padding 1 doubles the spatial size exactly
    up_.push_back(make_conv_transpose(ch, ch / 2, 4, 2, 1, rng));
    up_norm_.push_back(make_norm(ch / 2));
    ch /= 2;
  }
  tail_ = make_conv(out_channels, ch, 7, 1, 3, rng);
}

Tensor ResnetGenerator::forward(const Tensor& x) const {
  if (x.shape().c != in_channels_) {
    throw std::invalid_argument("generator expects " + std::to_string(in_channels_) +
                                " input channels, got " + x.shape().str());
  }
  const int div = 1 << down_depth_;
  if (x.shape().h % div != 0 || x.shape().w % div != 0) {
    throw std::invalid_argument("generator input spatial dims must be divisible by " +
                                std::to_string(div) + ", got " + x.shape().str());
  }
  Tensor h = relu(instance_norm(conv2d(x, head_.weight, head_.bias, 1, 3), head_norm_.gain,
                                head_norm_.offset));
  for (std::size_t i = 0; i < down_.size(); ++i) {
    h = relu(instance_norm(conv2d(h, down_[i].weight, down_[i].bias, 2, 1), down_norm_[i].gain,
                           down_norm_[i].offset));
  }
  for (const ResBlock& b : blocks_) {
    Tensor r = relu(instance_norm(conv2d(h, b.conv1.weight, b.conv1.bias, 1, 1), b.norm1.gain,
                                  b.norm1.offset));
    r = instance_norm(conv2d(r, b.conv2.weight, b.conv2.bias, 1, 1), b.norm2.gain, b.norm2.offset);
    h = add(h, r);
  }
  for (std::size_t i = 0; i < up_.size(); ++i) {
    h = relu(instance_norm(conv2d_transpose(h, up_[i].weight, up_[i].bias, 2, 1),
                           up_norm_[i].gain, up_norm_[i].offset));
  }
  return glomseg::tanh(conv2d(h, tail_.weight, tail_.bias, 1, 3));
}

std::vector<std::pair<std::string, Tensor>> ResnetGenerator::named_params() const {
  std::vector<std::pair<std::string, Tensor>> out;
  push_conv(out, "head", head_);
  push_norm(out, "head_norm", head_norm_);
  for (std::size_t i = 0; i < down_.size(); ++i) {
    push_conv(out, "down" + std::to_string(i), down_[i]);
    push_norm(out, "down" + std::to_string(i) + "_norm", down_norm_[i]);
  }
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "res" + std::to_string(i);
    push_conv(out, p + ".conv1", blocks_[i].conv1);
    push_norm(out, p + ".norm1", blocks_[i].norm1);
    push_conv(out, p + ".conv2", blocks_[i].conv2);
    push_norm(out, p + ".norm2", blocks_[i].norm2);
  }
  for (std::size_t i = 0; i < up_.size(); ++i) {
    push_conv(out, "up" + std::to_string(i), up_[i]);
    push_norm(out, "up" + std::to_string(i) + "_norm", up_norm_[i]);
  }
  push_conv(out, "tail", tail_);
  return out;
}

std::vector<Tensor> ResnetGenerator::params() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_params()) out.push_back(t);
  return out;
}

PatchDiscriminator::PatchDiscriminator(int in_channels, const NetSpec& spec, Rng& rng)
    : in_channels_(in_channels) {
  spec.validate();
  int ch = spec.disc_width;
  convs_.push_back(make_conv(ch, in_channels, 4, 2, 1, rng));  // no norm on the first layer
  for (int i = 1; i < spec.disc_layers; ++i) {
    convs_.push_back(make_conv(ch * 2, ch, 4, 2, 1, rng));
    norms_.push_back(make_norm(ch * 2));
    ch *= 2;
  }
  final_ = make_conv(1, ch, 4, 1, 1, rng);
}

Tensor PatchDiscriminator::forward(const Tensor& x) const {
  if (x.shape().c != in_channels_) {
    throw std::invalid_argument("discriminator expects " + std::to_string(in_channels_) +
                                " input channels, got " + x.shape().str());
  }
  Tensor h = leaky_relu(conv2d(x, convs_[0].weight, convs_[0].bias, 2, 1), 0.2f);
  for (std::size_t i = 1; i < convs_.size(); ++i) {
    h = leaky_relu(instance_norm(conv2d(h, convs_[i].weight, convs_[i].bias, 2, 1),
                                 norms_[i - 1].gain, norms_[i - 1].offset),
                   0.2f);
  }
  return conv2d(h, final_.weight, final_.bias, 1, 1);
}

std::vector<std::pair<std::string, Tensor>> PatchDiscriminator::named_params() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    push_conv(out, "conv" + std::to_string(i), convs_[i]);
    if (i >= 1) push_norm(out, "conv" + std::to_string(i) + "_norm", norms_[i - 1]);
  }
  push_conv(out, "final", final_);
  return out;
}

std::vector<Tensor> PatchDiscriminator::params() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_params()) out.push_back(t);
  return out;
}

void zero_grads(const std::vector<Tensor>& params) {
  for (Tensor p : params) p.zero_grad();  // handles share storage
}

void clear_grads(const std::vector<Tensor>& params) {
  for (Tensor p : params) p.clear_grad();
}

}  // namespace glomseg
