#pragma once

// Differentiable operations. Matrices are 2-D row-major tensors; vectors are
// 1-D. Broadcasting is limited to the row-wise forms (add_row, mul_row,
// scale_rows); every other shape mismatch throws ShapeError.

#include <cstdint>
#include <span>
#include <vector>

#include "hme/autodiff/tensor.hpp"

namespace hme::ad {

Tensor matmul(const Tensor& a, const Tensor& b);
// a * b^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Real factor);
// a[m,n] + bias[n] on every row.
Tensor add_row(const Tensor& a, const Tensor& bias);
// a[m,n] * gain[n] on every row.
Tensor mul_row(const Tensor& a, const Tensor& gain);
// Row i of a[m,n] times weights[i]; weights has m entries (shape [m] or [m,1]).
Tensor scale_rows(const Tensor& a, const Tensor& weights);

Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);

// Numerically stable softmax along `axis` (max subtracted first).
Tensor softmax(const Tensor& a, std::size_t axis);

// axis 0 stacks rows (vectors or matrices with equal columns); axis 1 joins
// matrices with equal row counts side by side.
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
// Rows of table[V,d] at the given indices; gradients scatter-add back.
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Mean of each contiguous row block [offsets[g], offsets[g+1]) of a[S,d].
Tensor segment_mean(const Tensor& a, std::span<const std::size_t> offsets);

// Identifies one dropout application: (run seed, op instance, step, call).
struct DropoutKey {
  std::uint64_t seed = 0;
  std::uint64_t op = 0;
  std::uint64_t step = 0;
  std::uint64_t call = 0;
};

// Identity when !train; otherwise zeroes entries with probability p and
// scales survivors by 1/(1-p). Requires 0 <= p < 1.
Tensor dropout(const Tensor& a, Real p, bool train, const DropoutKey& key);

// Normalizes each row to zero mean and unit (biased) variance.
Tensor layer_norm(const Tensor& a, Real eps = 1e-5);

}  // namespace hme::ad
