#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hme/autodiff/ops.hpp"
#include "hme/autodiff/tensor.hpp"

namespace hme::model {

struct NamedParameter {
  std::string name;
  ad::Tensor tensor;
};
using ParameterList = std::vector<NamedParameter>;

// Training/eval switch plus the counters that key dropout masks.
struct ForwardMode {
  bool train = false;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t calls = 0;

  ad::DropoutKey dropout_key(std::uint64_t op) { return {seed, op, step, calls++}; }
};

// Xavier-uniform matrix whose values depend only on (seed, name).
ad::Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed,
                          const std::string& name);

// y = x W + b with W: [in, out].
struct Linear {
  ad::Tensor weight;
  ad::Tensor bias;

  static Linear create(std::size_t in, std::size_t out, std::uint64_t seed, const std::string& name);
  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
  ad::Tensor forward(const ad::Tensor& x) const;
  void collect(ParameterList& out, const std::string& name) const;
};

// Row-wise layer normalization with learned gain and bias.
struct LayerNorm {
  ad::Tensor gain;
  ad::Tensor bias;
  double eps = 1e-5;

  static LayerNorm create(std::size_t dim);
  ad::Tensor forward(const ad::Tensor& x) const;
  void collect(ParameterList& out, const std::string& name) const;
};

struct Dropout {
  double p = 0.0;
  std::uint64_t op = 0;

  ad::Tensor forward(const ad::Tensor& x, ForwardMode& mode) const;
};

// Sinusoidal position encodings for the given positions, [positions, dim].
ad::Tensor position_encoding(std::span<const std::size_t> positions, std::size_t dim);

}  // namespace hme::model
