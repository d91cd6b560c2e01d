#include <doctest.h>

#include <cmath>
#include <numeric>

#include "glomseg/graph.hpp"
#include "glomseg/ops.hpp"
#include "glomseg/rng.hpp"
#include "support/ref_ops.hpp"
#include "support/test_util.hpp"

using namespace glomseg;
using testutil::random_tensor;

TEST_CASE("conv2d: all-ones 3x3 against all-ones kernel sums to 9") {
  Tensor x = Tensor::full(Shape{1, 1, 3, 3}, 1.0f);
  Tensor w = Tensor::full(Shape{1, 1, 3, 3}, 1.0f);
  Tensor b = Tensor::zeros(Shape{1, 1, 1, 1});
  Tensor out = conv2d(x, w, b, 1, 0);
  CHECK(out.shape() == Shape{1, 1, 1, 1});
  CHECK(out.item() == doctest::Approx(9.0f));
}

TEST_CASE("conv2d: 1x1 identity kernel reproduces the input") {
  Rng rng(3);
  Tensor x = random_tensor(Shape{2, 1, 4, 5}, rng);
  Tensor w = Tensor::full(Shape{1, 1, 1, 1}, 1.0f);
  Tensor b = Tensor::zeros(Shape{1, 1, 1, 1});
  Tensor out = conv2d(x, w, b, 1, 0);
  REQUIRE(out.shape() == x.shape());
  for (std::size_t i = 0; i < x.values().size(); ++i) {
    CHECK(out.values()[i] == doctest::Approx(x.values()[i]));
  }
}

TEST_CASE("conv2d matches the nested-loop oracle elementwise") {
  Rng rng(5);
  Tensor x = random_tensor(Shape{1, 2, 5, 5}, rng);
  Tensor w = random_tensor(Shape{3, 2, 3, 3}, rng);
  Tensor b = random_tensor(Shape{1, 3, 1, 1}, rng);
  Tensor out = conv2d(x, w, b, 1, 1);
  refops::Dims od;
  refops::Vec ref = refops::conv2d(testutil::to_vec(x), testutil::to_dims(x), testutil::to_vec(w),
                                   testutil::to_dims(w), testutil::to_vec(b), 1, 1, od);
  REQUIRE(out.numel() == static_cast<std::int64_t>(ref.size()));
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(std::abs(out.values()[i] - ref[i]) < 1e-5);
  }
}

TEST_CASE("conv2d rejects mismatched shapes") {
  Tensor x = Tensor::zeros(Shape{1, 2, 5, 5});
  Tensor w = Tensor::zeros(Shape{3, 3, 3, 3});  // c_in mismatch
  Tensor b = Tensor::zeros(Shape{1, 3, 1, 1});
  CHECK_THROWS_AS(conv2d(x, w, b, 1, 1), std::invalid_argument);
  Tensor w2 = Tensor::zeros(Shape{3, 2, 3, 3});
  Tensor b2 = Tensor::zeros(Shape{1, 4, 1, 1});  // bias mismatch
  CHECK_THROWS_AS(conv2d(x, w2, b2, 1, 1), std::invalid_argument);
  // kernel larger than the padded input
  CHECK_THROWS_AS(conv2d(x, Tensor::zeros(Shape{1, 2, 7, 7}), Tensor::zeros(Shape{1, 1, 1, 1}), 1, 0),
                  std::invalid_argument);
}

TEST_CASE("conv2d_transpose: stride 1, 1x1 unit kernel is the identity") {
  Rng rng(6);
  Tensor x = random_tensor(Shape{1, 1, 4, 4}, rng);
  Tensor w = Tensor::full(Shape{1, 1, 1, 1}, 1.0f);
  Tensor b = Tensor::zeros(Shape{1, 1, 1, 1});
  Tensor out = conv2d_transpose(x, w, b, 1, 0);
  REQUIRE(out.shape() == x.shape());
  for (std::size_t i = 0; i < x.values().size(); ++i) {
    CHECK(out.values()[i] == doctest::Approx(x.values()[i]));
  }
}

TEST_CASE("conv2d_transpose: stride-2 all-ones 2x2 kernel block-expands") {
  Tensor x = Tensor::from_vector(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
  Tensor w = Tensor::full(Shape{1, 1, 2, 2}, 1.0f);
  Tensor b = Tensor::zeros(Shape{1, 1, 1, 1});
  Tensor out = conv2d_transpose(x, w, b, 2, 0);
  REQUIRE(out.shape() == Shape{1, 1, 4, 4});
  const float expected[16] = {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
  for (int i = 0; i < 16; ++i) CHECK(out.values()[i] == doctest::Approx(expected[i]));
}

TEST_CASE("conv2d and conv2d_transpose are adjoint") {
  Rng rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const int stride = 1 + trial % 2;
    const int pad = trial % 2;
    Tensor x = random_tensor(Shape{1, 2, 6, 6}, rng);
    Tensor w = random_tensor(Shape{3, 2, 3, 3}, rng);
    Tensor zero_b3 = Tensor::zeros(Shape{1, 3, 1, 1});
    Tensor zero_b2 = Tensor::zeros(Shape{1, 2, 1, 1});
    Tensor cx = conv2d(x, w, zero_b3, stride, pad);
    Tensor y = random_tensor(cx.shape(), rng);
    Tensor ty = conv2d_transpose(y, w, zero_b2, stride, pad);
    REQUIRE(ty.shape() == x.shape());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < cx.values().size(); ++i) {
      lhs += double(cx.values()[i]) * y.values()[i];
    }
    for (std::size_t i = 0; i < x.values().size(); ++i) {
      rhs += double(x.values()[i]) * ty.values()[i];
    }
    CHECK(std::abs(lhs - rhs) < 1e-4 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("conv2d_transpose matches the scatter oracle") {
  Rng rng(10);
  Tensor x = random_tensor(Shape{1, 3, 4, 4}, rng);
  Tensor w = random_tensor(Shape{3, 2, 4, 4}, rng);
  Tensor b = random_tensor(Shape{1, 2, 1, 1}, rng);
  Tensor out = conv2d_transpose(x, w, b, 2, 1);
  refops::Dims od;
  refops::Vec ref = refops::conv2d_transpose(testutil::to_vec(x), testutil::to_dims(x),
                                             testutil::to_vec(w), testutil::to_dims(w),
                                             testutil::to_vec(b), 2, 1, od);
  REQUIRE(out.numel() == static_cast<std::int64_t>(ref.size()));
  CHECK(out.shape().h == 8);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(std::abs(out.values()[i] - ref[i]) < 1e-5);
  }
}

TEST_CASE("instance_norm: constant plane maps to the offset") {
  Tensor x = Tensor::full(Shape{1, 2, 4, 4}, 3.25f);
  Tensor gain = Tensor::full(Shape{1, 2, 1, 1}, 1.0f);
  Tensor offset = Tensor::zeros(Shape{1, 2, 1, 1});
  Tensor out = instance_norm(x, gain, offset);
  for (float v : out.values()) CHECK(v == doctest::Approx(0.0f).epsilon(1e-6));
}

TEST_CASE("instance_norm: plane 1..4 normalizes to zero mean unit variance") {
  Tensor x = Tensor::from_vector(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
  Tensor gain = Tensor::full(Shape{1, 1, 1, 1}, 1.0f);
  Tensor offset = Tensor::zeros(Shape{1, 1, 1, 1});
  Tensor out = instance_norm(x, gain, offset, 1e-9f);
  double mean = 0.0, var = 0.0;
  for (float v : out.values()) mean += v;
  mean /= 4.0;
  for (float v : out.values()) var += (v - mean) * (v - mean);
  var /= 4.0;
  CHECK(std::abs(mean) < 1e-6);
  CHECK(std::abs(var - 1.0) < 1e-3);
}

TEST_CASE("instance_norm: gain and offset push through to std and mean") {
  Rng rng(12);
  Tensor x = random_tensor(Shape{1, 1, 8, 8}, rng);
  Tensor gain = Tensor::full(Shape{1, 1, 1, 1}, 2.0f);
  Tensor offset = Tensor::full(Shape{1, 1, 1, 1}, 3.0f);
  Tensor out = instance_norm(x, gain, offset, 1e-9f);
  double mean = 0.0;
  for (float v : out.values()) mean += v;
  mean /= out.numel();
  double var = 0.0;
  for (float v : out.values()) var += (v - mean) * (v - mean);
  var /= out.numel();
  CHECK(mean == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(std::sqrt(var) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("activation point values") {
  Tensor x = Tensor::from_vector(Shape{1, 1, 1, 2}, {-1.0f, 2.0f});
  Tensor r = relu(x);
  CHECK(r.values()[0] == 0.0f);
  CHECK(r.values()[1] == 2.0f);
  CHECK(sigmoid(Tensor::scalar(0.0f)).item() == doctest::Approx(0.5f));
  Tensor l = leaky_relu(x, 0.2f);
  CHECK(l.values()[0] == doctest::Approx(-0.2f));
  CHECK(l.values()[1] == doctest::Approx(2.0f));
}

TEST_CASE("tanh gradient at zero equals 1 against central differences") {
  Tensor x = Tensor::scalar(0.0f);
  x.set_requires_grad(true);
  Graph tape;
  Tensor loss = sum_all(glomseg::tanh(x));
  tape.backward(loss);
  const double h = 1e-4;
  const double fd = (std::tanh(h) - std::tanh(-h)) / (2.0 * h);
  CHECK(std::abs(double(x.grad()[0]) - fd) < 1e-6);
  CHECK(x.grad()[0] == doctest::Approx(1.0f).epsilon(1e-6));
}

TEST_CASE("l1_mean point values and oracle") {
  Tensor a = Tensor::from_vector(Shape{1, 1, 1, 2}, {1.0f, 2.0f});
  Tensor b = Tensor::zeros(Shape{1, 1, 1, 2});
  CHECK(l1_mean(a, a).item() == 0.0f);
  CHECK(l1_mean(a, b).item() == doctest::Approx(1.5f));

  Rng rng(13);
  Tensor u = random_tensor(Shape{2, 3, 4, 4}, rng);
  Tensor v = random_tensor(Shape{2, 3, 4, 4}, rng);
  const double ref = refops::l1_mean(testutil::to_vec(u), testutil::to_vec(v));
  CHECK(std::abs(l1_mean(u, v).item() - ref) < 1e-6);
  CHECK_THROWS_AS(l1_mean(u, Tensor::zeros(Shape{1, 1, 2, 2})), std::invalid_argument);
}

TEST_CASE("log_clamped floors at the clamp value") {
  Tensor x = Tensor::from_vector(Shape{1, 1, 1, 3}, {0.5f, 0.0f, -1.0f});
  Tensor out = log_clamped(x, 1e-7f);
  CHECK(out.values()[0] == doctest::Approx(std::log(0.5f)));
  CHECK(out.values()[1] == doctest::Approx(std::log(1e-7f)));
  CHECK(out.values()[2] == doctest::Approx(std::log(1e-7f)));
}
