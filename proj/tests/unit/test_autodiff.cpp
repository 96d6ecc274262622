#include "doctest.h"

#include <cmath>

#include "hme/autodiff/ops.hpp"
#include "hme/util/error.hpp"
#include "support/gradcheck.hpp"
#include "support/op_cases.hpp"

using namespace hme;
using ad::Tensor;
using testing::random_tensor;

TEST_CASE("matmul: identity and hand examples") {
  const Tensor eye = Tensor::matrix({{1, 0}, {0, 1}});
  const Tensor m = Tensor::matrix({{1, 2}, {3, 4}});
  const Tensor p = ad::matmul(eye, m);
  CHECK(std::vector<double>(p.data().begin(), p.data().end()) == std::vector<double>{1, 2, 3, 4});
  const Tensor dotp = ad::matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}}));
  CHECK(dotp.item() == 11.0);
  CHECK_THROWS_AS(ad::matmul(m, Tensor::matrix({{1, 2, 3}})), ShapeError);
}

TEST_CASE("matmul: value and gradients match a triple-loop oracle") {
  Rng rng(2024);
  Tensor a = random_tensor(rng, {3, 4});
  Tensor b = random_tensor(rng, {4, 2});
  Tensor w = random_tensor(rng, {3, 2}, false);
  ad::Tape::current().clear();
  const Tensor c = ad::matmul(a, b);
  ad::backward(testing::weighted_sum(c, w));
  // Oracle: C = AB, dA = W B^T, dB = A^T W for loss sum(C * W).
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += a.at(i, k) * b.at(k, j);
      CHECK(std::abs(c.at(i, j) - s) <= 1e-12);
    }
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 4; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < 2; ++j) s += w.at(i, j) * b.at(k, j);
      CHECK(std::abs(a.grad()[i * 4 + k] - s) <= 1e-12);
    }
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < 3; ++i) s += a.at(i, k) * w.at(i, j);
      CHECK(std::abs(b.grad()[k * 2 + j] - s) <= 1e-12);
    }
  ad::Tape::current().clear();
}

TEST_CASE("softmax: symmetry, stability, Jacobian") {
  const Tensor u = ad::softmax(Tensor::from({3}, {0, 0, 0}), 0);
  for (double v : u.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const Tensor big = ad::softmax(Tensor::from({3}, {1000, 1000, 999}), 0);
  double total = 0.0;
  for (double v : big.data()) {
    CHECK(std::isfinite(v));
    total += v;
  }
  CHECK(std::abs(total - 1.0) <= 1e-9);

  // Full Jacobian of softmax([1,2,3]) against central differences.
  for (std::size_t out = 0; out < 3; ++out) {
    Tensor x = Tensor::from({3}, {1, 2, 3}, true);
    const double err = testing::max_gradient_error(
        [&] { return ad::slice_rows(ad::softmax(x, 0), out, out + 1); }, {x}, 1e-6);
    CHECK(err <= 1e-6);
  }
}

TEST_CASE("softmax: simplex and shift invariance on random rows") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x = random_tensor(rng, {3, 5}, false, -20, 20);
    const double c = rng.uniform(-50, 50);
    std::vector<double> shifted(x.data().begin(), x.data().end());
    for (double& v : shifted) v += c;
    const Tensor s1 = ad::softmax(x, 1);
    const Tensor s2 = ad::softmax(Tensor::from({3, 5}, shifted), 1);
    for (std::size_t r = 0; r < 3; ++r) {
      double total = 0.0;
      for (std::size_t k = 0; k < 5; ++k) {
        CHECK(s1.at(r, k) >= 0.0);
        total += s1.at(r, k);
        CHECK(std::abs(s1.at(r, k) - s2.at(r, k)) <= 1e-9);
      }
      CHECK(std::abs(total - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("elementwise basics") {
  CHECK(ad::tanh(Tensor::scalar(0.0)).item() == 0.0);
  Rng rng(9);
  const Tensor x = random_tensor(rng, {4, 3}, false);
  const Tensor y = ad::dropout(x, 0.1, false, {});
  CHECK(std::equal(x.data().begin(), x.data().end(), y.data().begin()));
  CHECK_THROWS(ad::dropout(x, 1.0, true, {}));
  CHECK_THROWS(ad::dropout(x, -0.1, true, {}));

  const Tensor kept = ad::dropout(Tensor::from({1000}, std::vector<double>(1000, 1.0)), 0.25, true,
                                  {7, 1, 1, 0});
  std::size_t zeros = 0;
  for (double v : kept.data()) {
    if (v == 0.0) ++zeros;
    else CHECK(v == doctest::Approx(1.0 / 0.75));
  }
  CHECK(zeros > 180);
  CHECK(zeros < 320);
}

TEST_CASE("dropout masks are keyed, not stateful") {
  const Tensor x = Tensor::from({64}, std::vector<double>(64, 1.0));
  const Tensor a = ad::dropout(x, 0.5, true, {1, 2, 3, 4});
  const Tensor b = ad::dropout(x, 0.5, true, {1, 2, 3, 4});
  const Tensor c = ad::dropout(x, 0.5, true, {1, 2, 4, 4});
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
}

TEST_CASE("layer_norm normalizes and differentiates") {
  Rng rng(12);
  Tensor x = random_tensor(rng, {8}, true, -3, 3);
  const Tensor y = ad::layer_norm(x, 1e-12);
  double mean = 0.0, var = 0.0;
  for (double v : y.data()) mean += v / 8.0;
  for (double v : y.data()) var += (v - mean) * (v - mean) / 8.0;
  CHECK(std::abs(mean) <= 1e-6);
  CHECK(std::abs(var - 1.0) <= 1e-6);
  Tensor w = random_tensor(rng, {8}, false);
  CHECK(testing::max_gradient_error([&] { return testing::weighted_sum(ad::layer_norm(x), w); },
                                    {x}) <= 1e-5);
}

TEST_CASE("backward: simple cases and accumulation") {
  Tensor x = Tensor::from({3}, {0.5, -1, 2}, true);
  ad::backward(ad::sum(x));
  for (double g : x.grad()) CHECK(g == 1.0);
  ad::backward(ad::sum(x));
  for (double g : x.grad()) CHECK(g == 2.0);
  x.zero_grad();
  for (double g : x.grad()) CHECK(g == 0.0);
  ad::Tape::current().clear();

  Tensor s = Tensor::scalar(3.0, true);
  ad::backward(ad::mul(s, s));
  CHECK(s.grad()[0] == 6.0);
  ad::Tape::current().clear();

  CHECK_THROWS_AS(ad::backward(ad::add(x, x)), ShapeError);
  ad::Tape::current().clear();
}

TEST_CASE("no-grad guard records nothing") {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  const std::size_t before = ad::Tape::current().size();
  {
    ad::NoGradGuard guard;
    const Tensor y = ad::tanh(x);
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(ad::Tape::current().size() == before);
}

TEST_CASE("non-finite results are rejected") {
  const Tensor x = Tensor::from({2}, {1e308, 1e308});
  CHECK_THROWS_AS(ad::add(x, x), NumericError);
}

TEST_CASE("shape errors") {
  const Tensor a = Tensor::zeros({2, 3});
  CHECK_THROWS_AS(ad::add(a, Tensor::zeros({3, 2})), ShapeError);
  CHECK_THROWS_AS(ad::add_row(a, Tensor::zeros({2})), ShapeError);
  CHECK_THROWS_AS(ad::slice_cols(a, 2, 4), ShapeError);
  CHECK_THROWS_AS(ad::concat({a, Tensor::zeros({3, 3})}, 1), ShapeError);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), ShapeError);
}

TEST_CASE("every op passes a finite-difference check") {
  for (const auto& op : testing::autodiff_op_cases()) {
    INFO(op.name);
    Rng rng(hash_key(77, op.name.size()));
    double worst = 0.0;
    for (int seed = 0; seed < 10; ++seed) {
      auto c = op.make(rng);
      worst = std::max(worst, testing::max_gradient_error(c.loss, c.wrt));
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("same inputs and op sequence give bit-identical results") {
  auto run = [] {
    Rng rng(42);
    const Tensor a = random_tensor(rng, {5, 7}, false);
    const Tensor b = random_tensor(rng, {7, 3}, false);
    return ad::layer_norm(ad::softmax(ad::tanh(ad::matmul(a, b)), 1));
  };
  const Tensor x = run(), y = run();
  CHECK(std::equal(x.data().begin(), x.data().end(), y.data().begin()));
}
