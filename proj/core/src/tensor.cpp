#include "glomseg/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace glomseg {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

namespace {

void check_shape(const Shape& s) {
  if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1) {
    throw std::invalid_argument("tensor shape must have positive dims, got " + s.str());
  }
}

bool g_debug_checks = false;

}  // namespace

Tensor Tensor::zeros(Shape s, bool requires_grad) {
  check_shape(s);
  auto st = std::make_shared<Storage>();
  st->shape = s;
  st->values.assign(static_cast<std::size_t>(s.numel()), 0.0f);
  st->requires_grad = requires_grad;
  return Tensor(std::move(st));
}

Tensor Tensor::full(Shape s, float value, bool requires_grad) {
  Tensor t = zeros(s, requires_grad);
  for (float& v : t.values()) v = value;
  return t;
}

Tensor Tensor::from_vector(Shape s, std::vector<float> values, bool requires_grad) {
  check_shape(s);
  if (static_cast<std::int64_t>(values.size()) != s.numel()) {
    throw std::invalid_argument("tensor data length " + std::to_string(values.size()) +
                                " does not match shape " + s.str());
  }
  auto st = std::make_shared<Storage>();
  st->shape = s;
  st->values = std::move(values);
  st->requires_grad = requires_grad;
  return Tensor(std::move(st));
}

Tensor Tensor::scalar(float value) {
  return from_vector(Shape{1, 1, 1, 1}, {value});
}

const Shape& Tensor::shape() const {
  if (!d_) throw std::logic_error("shape() on undefined tensor");
  return d_->shape;
}

std::int64_t Tensor::numel() const { return shape().numel(); }

float Tensor::item() const {
  if (!is_scalar()) {
    throw std::invalid_argument("item() requires a scalar tensor, got shape " + shape().str());
  }
  return d_->values[0];
}

std::span<float> Tensor::values() {
  if (!d_) throw std::logic_error("values() on undefined tensor");
  return d_->values;
}

std::span<const float> Tensor::values() const {
  if (!d_) throw std::logic_error("values() on undefined tensor");
  return d_->values;
}

bool Tensor::requires_grad() const { return d_ && d_->requires_grad; }

void Tensor::set_requires_grad(bool rg) {
  if (!d_) throw std::logic_error("set_requires_grad() on undefined tensor");
  d_->requires_grad = rg;
}

bool Tensor::has_grad() const { return d_ && !d_->grad.empty(); }

std::span<float> Tensor::grad() {
  if (!has_grad()) throw std::logic_error("grad() called but gradient is absent");
  return d_->grad;
}

std::span<const float> Tensor::grad() const {
  if (!has_grad()) throw std::logic_error("grad() called but gradient is absent");
  return d_->grad;
}

void Tensor::ensure_grad() {
  if (!d_) throw std::logic_error("ensure_grad() on undefined tensor");
  if (d_->grad.empty()) d_->grad.assign(d_->values.size(), 0.0f);
}

void Tensor::zero_grad() {
  ensure_grad();
  for (float& g : d_->grad) g = 0.0f;
}

void Tensor::clear_grad() {
  if (d_) d_->grad.clear();
}

Tensor Tensor::detached_copy() const {
  if (!d_) return Tensor();
  auto st = std::make_shared<Storage>();
  st->shape = d_->shape;
  st->values = d_->values;
  st->requires_grad = false;
  return Tensor(std::move(st));
}

void set_debug_checks(bool enabled) { g_debug_checks = enabled; }

bool debug_checks_enabled() { return g_debug_checks; }

void debug_check_finite(const Tensor& t, const char* op_name) {
  if (!g_debug_checks) return;
  for (float v : t.values()) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(std::string("non-finite value produced by ") + op_name);
    }
  }
}

}  // namespace glomseg
