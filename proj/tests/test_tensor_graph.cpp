#include <doctest.h>

#include <stdexcept>

#include "glomseg/graph.hpp"
#include "glomseg/ops.hpp"
#include "glomseg/rng.hpp"
#include "glomseg/tensor.hpp"
#include "support/test_util.hpp"

using namespace glomseg;

TEST_CASE("tensor shape and data length stay consistent") {
  Tensor t = Tensor::zeros(Shape{2, 3, 4, 5});
  CHECK(t.numel() == 120);
  CHECK(t.values().size() == 120);
  CHECK_THROWS_AS(Tensor::from_vector(Shape{1, 1, 2, 2}, {1.0f, 2.0f}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor::zeros(Shape{0, 1, 1, 1}), std::invalid_argument);
}

TEST_CASE("grad lifecycle: absent, ensure, zero, clear") {
  Tensor t = Tensor::zeros(Shape{1, 1, 2, 2}, true);
  CHECK(!t.has_grad());
  t.ensure_grad();
  CHECK(t.has_grad());
  t.grad()[0] = 5.0f;
  t.zero_grad();
  CHECK(t.grad()[0] == 0.0f);
  t.clear_grad();
  CHECK(!t.has_grad());
}

TEST_CASE("backward of sum gives all-ones gradient") {
  Tensor x = Tensor::full(Shape{2, 1, 3, 3}, 0.5f, true);
  Graph tape;
  Tensor loss = sum_all(x);
  tape.backward(loss);
  REQUIRE(x.has_grad());
  for (float g : x.grad()) CHECK(g == doctest::Approx(1.0f));
}

TEST_CASE("backward requires a scalar loss") {
  Tensor x = Tensor::zeros(Shape{1, 1, 2, 2}, true);
  Graph tape;
  Tensor y = relu(x);
  CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
}

TEST_CASE("second backward without reset doubles every gradient exactly") {
  Rng rng(7);
  Tensor x = testutil::random_tensor(Shape{1, 2, 3, 3}, rng, -1.0, 1.0, true, 0.05);
  Graph tape;
  Tensor loss = mean_all(glomseg::tanh(x));
  tape.backward(loss);
  std::vector<float> once(x.grad().begin(), x.grad().end());
  tape.backward(loss);
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(x.grad()[i] == doctest::Approx(2.0f * once[i]).epsilon(1e-6));
  }
}

TEST_CASE("ops do not record when no graph is active") {
  Tensor x = Tensor::full(Shape{1, 1, 2, 2}, 1.0f, true);
  Tensor y = relu(x);
  CHECK(y.requires_grad());  // flag propagates, but nothing was recorded
  Graph tape;
  CHECK(tape.node_count() == 0);
}

TEST_CASE("nodes not feeding the loss leave their leaves' gradients absent") {
  Tensor a = Tensor::full(Shape{1, 1, 1, 1}, 1.0f, true);
  Tensor b = Tensor::full(Shape{1, 1, 1, 1}, 2.0f, true);
  Graph tape;
  Tensor used = sum_all(relu(a));
  Tensor unused = sum_all(relu(b));
  tape.backward(used);
  CHECK(a.has_grad());
  CHECK(!b.has_grad());
}

TEST_CASE("forward passes are bitwise deterministic") {
  Rng rng(11);
  Tensor x = testutil::random_tensor(Shape{1, 3, 8, 8}, rng);
  Tensor w = testutil::random_tensor(Shape{4, 3, 3, 3}, rng);
  Tensor b = testutil::random_tensor(Shape{1, 4, 1, 1}, rng);
  Tensor out1 = conv2d(x, w, b, 1, 1);
  Tensor out2 = conv2d(x, w, b, 1, 1);
  for (std::size_t i = 0; i < out1.values().size(); ++i) {
    CHECK(out1.values()[i] == out2.values()[i]);
  }
}

TEST_CASE("debug check surfaces non-finite forward values") {
  set_debug_checks(true);
  Tensor x = Tensor::full(Shape{1, 1, 1, 1}, std::numeric_limits<float>::infinity());
  CHECK_THROWS_AS(relu(x), std::runtime_error);
  set_debug_checks(false);
  CHECK_NOTHROW(relu(x));
}
