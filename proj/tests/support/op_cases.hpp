#pragma once

// Random gradient-check instances for every differentiable autodiff op.

#include <functional>
#include <string>
#include <vector>

#include "gradcheck.hpp"

namespace hme::testing {

struct GradCase {
  std::function<ad::Tensor()> loss;
  std::vector<ad::Tensor> wrt;
};

struct OpCase {
  std::string name;
  std::function<GradCase(Rng&)> make;
};

inline std::vector<OpCase> autodiff_op_cases() {
  using ad::Tensor;
  std::vector<OpCase> cases;
  auto dims = [](Rng& rng) { return 1 + rng.below(4); };
  cases.push_back({"matmul", [=](Rng& rng) {
                     const auto m = dims(rng), k = dims(rng), n = dims(rng);
                     auto a = random_tensor(rng, {m, k}), b = random_tensor(rng, {k, n});
                     auto w = random_tensor(rng, {m, n}, false);
                     return GradCase{[=] { return weighted_sum(ad::matmul(a, b), w); }, {a, b}};
                   }});
  cases.push_back({"matmul_nt", [=](Rng& rng) {
                     const auto m = dims(rng), k = dims(rng), n = dims(rng);
                     auto a = random_tensor(rng, {m, k}), b = random_tensor(rng, {n, k});
                     auto w = random_tensor(rng, {m, n}, false);
                     return GradCase{[=] { return weighted_sum(ad::matmul_nt(a, b), w); }, {a, b}};
                   }});
  cases.push_back({"transpose", [=](Rng& rng) {
                     auto a = random_tensor(rng, {dims(rng), dims(rng)});
                     auto w = random_tensor(rng, {a.cols(), a.rows()}, false);
                     return GradCase{[=] { return weighted_sum(ad::transpose(a), w); }, {a}};
                   }});
  cases.push_back({"add/sub/mul", [=](Rng& rng) {
                     const auto m = dims(rng), n = dims(rng);
                     auto a = random_tensor(rng, {m, n}), b = random_tensor(rng, {m, n});
                     auto w = random_tensor(rng, {m, n}, false);
                     return GradCase{[=] {
                                       return weighted_sum(
                                           ad::mul(ad::add(a, b), ad::sub(a, ad::scale(b, 0.7))), w);
                                     },
                                     {a, b}};
                   }});
  cases.push_back({"add_row/mul_row", [=](Rng& rng) {
                     const auto m = dims(rng), n = dims(rng);
                     auto a = random_tensor(rng, {m, n}), g = random_tensor(rng, {n}),
                          b = random_tensor(rng, {n});
                     auto w = random_tensor(rng, {m, n}, false);
                     return GradCase{[=] { return weighted_sum(ad::add_row(ad::mul_row(a, g), b), w); },
                                     {a, g, b}};
                   }});
  cases.push_back({"scale_rows", [=](Rng& rng) {
                     const auto m = dims(rng), n = dims(rng);
                     auto a = random_tensor(rng, {m, n}), s = random_tensor(rng, {m, 1});
                     auto w = random_tensor(rng, {m, n}, false);
                     return GradCase{[=] { return weighted_sum(ad::scale_rows(a, s), w); }, {a, s}};
                   }});
  cases.push_back({"tanh", [=](Rng& rng) {
                     auto a = random_tensor(rng, {dims(rng), dims(rng)}, true, -2.0, 2.0);
                     auto w = random_tensor(rng, a.shape(), false);
                     return GradCase{[=] { return weighted_sum(ad::tanh(a), w); }, {a}};
                   }});
  cases.push_back({"relu", [=](Rng& rng) {
                     // Keep entries away from the kink at 0.
                     auto a = random_tensor(rng, {dims(rng), dims(rng)}, true, 0.05, 1.0);
                     auto data = a.mutable_data();
                     for (std::size_t i = 0; i < data.size(); i += 2) data[i] = -data[i];
                     auto w = random_tensor(rng, a.shape(), false);
                     return GradCase{[=] { return weighted_sum(ad::relu(a), w); }, {a}};
                   }});
  cases.push_back({"softmax", [=](Rng& rng) {
                     const std::size_t axis = rng.below(2);
                     auto a = random_tensor(rng, {1 + dims(rng), 1 + dims(rng)}, true, -3.0, 3.0);
                     auto w = random_tensor(rng, a.shape(), false);
                     return GradCase{[=] { return weighted_sum(ad::softmax(a, axis), w); }, {a}};
                   }});
  cases.push_back({"concat", [=](Rng& rng) {
                     const std::size_t axis = rng.below(2);
                     const auto m = dims(rng), n = dims(rng);
                     auto a = random_tensor(rng, {m, n});
                     auto b = axis == 0 ? random_tensor(rng, {dims(rng), n}) : random_tensor(rng, {m, dims(rng)});
                     auto w = axis == 0 ? random_tensor(rng, {m + b.rows(), n}, false)
                                        : random_tensor(rng, {m, n + b.cols()}, false);
                     return GradCase{[=] { return weighted_sum(ad::concat({a, b}, axis), w); }, {a, b}};
                   }});
  cases.push_back({"slice_rows/slice_cols", [=](Rng& rng) {
                     auto a = random_tensor(rng, {2 + dims(rng), 2 + dims(rng)});
                     auto w = random_tensor(rng, {a.rows() - 1, a.cols() - 1}, false);
                     return GradCase{[=] {
                                       return weighted_sum(
                                           ad::slice_cols(ad::slice_rows(a, 1, a.rows()), 0, a.cols() - 1), w);
                                     },
                                     {a}};
                   }});
  cases.push_back({"gather_rows", [=](Rng& rng) {
                     auto table = random_tensor(rng, {1 + dims(rng), dims(rng)});
                     std::vector<std::size_t> idx;
                     for (std::size_t i = 0; i < 5; ++i) idx.push_back(rng.below(table.rows()));
                     auto w = random_tensor(rng, {idx.size(), table.cols()}, false);
                     return GradCase{[=] { return weighted_sum(ad::gather_rows(table, idx), w); }, {table}};
                   }});
  cases.push_back({"sum/mean", [=](Rng& rng) {
                     auto a = random_tensor(rng, {dims(rng), dims(rng)});
                     return GradCase{[=] { return ad::add(ad::sum(ad::tanh(a)), ad::scale(ad::mean(a), 3.0)); },
                                     {a}};
                   }});
  cases.push_back({"segment_mean", [=](Rng& rng) {
                     std::vector<std::size_t> offsets{0};
                     for (std::size_t g = 0, n = dims(rng); g < n; ++g) offsets.push_back(offsets.back() + dims(rng));
                     auto a = random_tensor(rng, {offsets.back(), dims(rng)});
                     auto w = random_tensor(rng, {offsets.size() - 1, a.cols()}, false);
                     return GradCase{[=] { return weighted_sum(ad::segment_mean(a, offsets), w); }, {a}};
                   }});
  cases.push_back({"dropout", [=](Rng& rng) {
                     auto a = random_tensor(rng, {dims(rng), dims(rng)});
                     auto w = random_tensor(rng, a.shape(), false);
                     const ad::DropoutKey key{rng.next(), 1, 2, 3};
                     return GradCase{[=] { return weighted_sum(ad::dropout(a, 0.3, true, key), w); }, {a}};
                   }});
  cases.push_back({"layer_norm", [=](Rng& rng) {
                     auto a = random_tensor(rng, {dims(rng), 2 + dims(rng)}, true, -2.0, 2.0);
                     auto w = random_tensor(rng, a.shape(), false);
                     return GradCase{[=] { return weighted_sum(ad::layer_norm(a, 1e-5), w); }, {a}};
                   }});
  return cases;
}

}  // namespace hme::testing
