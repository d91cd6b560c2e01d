#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace glomseg {

struct Shape {
  int n = 1, c = 1, h = 1, w = 1;

  std::int64_t numel() const {
    return static_cast<std::int64_t>(n) * c * h * w;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

// Dense NCHW float32 tensor with an optional gradient buffer. A Tensor is a
// shared handle: copies alias the same storage, which is what lets recorded
// backward closures accumulate into the gradients of the tensors the caller
// still holds.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape s, bool requires_grad = false);
  static Tensor full(Shape s, float value, bool requires_grad = false);
  static Tensor from_vector(Shape s, std::vector<float> values, bool requires_grad = false);
  static Tensor scalar(float value);

  bool defined() const { return d_ != nullptr; }
  const Shape& shape() const;
  std::int64_t numel() const;
  bool is_scalar() const { return defined() && numel() == 1; }
  float item() const;

  std::span<float> values();
  std::span<const float> values() const;

  bool requires_grad() const;
  void set_requires_grad(bool rg);

  bool has_grad() const;
  std::span<float> grad();
  std::span<const float> grad() const;
  void ensure_grad();  // allocate a zero gradient if absent
  void zero_grad();    // allocate if absent, then fill with zeros
  void clear_grad();   // drop the gradient buffer (back to absent)

  // Deep copy of the values; requires_grad off, no gradient.
  Tensor detached_copy() const;

  bool same_storage(const Tensor& other) const { return d_ == other.d_; }

 private:
  struct Storage {
    Shape shape;
    std::vector<float> values;
    std::vector<float> grad;  // empty == absent
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> d_;
  explicit Tensor(std::shared_ptr<Storage> s) : d_(std::move(s)) {}
};

// Debug NaN/Inf sweep after every forward op. Off by default; training checks
// its loss scalars regardless of this flag.
void set_debug_checks(bool enabled);
bool debug_checks_enabled();
void debug_check_finite(const Tensor& t, const char* op_name);

}  // namespace glomseg
