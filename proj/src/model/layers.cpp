#include "hme/model/layers.hpp"

#include <cmath>

#include "hme/util/hash.hpp"
#include "hme/util/random.hpp"

namespace hme::model {

ad::Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed,
                          const std::string& name) {
  Rng rng(hash_key(seed, hash_string(name)));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<ad::Real> values(fan_in * fan_out);
  for (auto& v : values) v = rng.uniform(-limit, limit);
  return ad::Tensor::from({fan_in, fan_out}, std::move(values), true);
}

Linear Linear::create(std::size_t in, std::size_t out, std::uint64_t seed,
                      const std::string& name) {
  return {xavier_uniform(in, out, seed, name + ".weight"), ad::Tensor::zeros({out}, true)};
}

ad::Tensor Linear::forward(const ad::Tensor& x) const {
  return ad::add_row(ad::matmul(x, weight), bias);
}

void Linear::collect(ParameterList& out, const std::string& name) const {
  out.push_back({name + ".weight", weight});
  out.push_back({name + ".bias", bias});
}

LayerNorm LayerNorm::create(std::size_t dim) {
  return {ad::Tensor::from({dim}, std::vector<ad::Real>(dim, 1.0), true),
          ad::Tensor::zeros({dim}, true)};
}

ad::Tensor LayerNorm::forward(const ad::Tensor& x) const {
  return ad::add_row(ad::mul_row(ad::layer_norm(x, eps), gain), bias);
}

void LayerNorm::collect(ParameterList& out, const std::string& name) const {
  out.push_back({name + ".gain", gain});
  out.push_back({name + ".bias", bias});
}

ad::Tensor Dropout::forward(const ad::Tensor& x, ForwardMode& mode) const {
  if (!mode.train || p == 0.0) return x;
  return ad::dropout(x, p, true, mode.dropout_key(op));
}

ad::Tensor position_encoding(std::span<const std::size_t> positions, std::size_t dim) {
  std::vector<ad::Real> values(positions.size() * dim);
  for (std::size_t r = 0; r < positions.size(); ++r) {
    const double pos = static_cast<double>(positions[r]);
    for (std::size_t k = 0; k < dim; ++k) {
      const double rate = std::pow(10000.0, static_cast<double>(k - k % 2) / static_cast<double>(dim));
      values[r * dim + k] = (k % 2 == 0) ? std::sin(pos / rate) : std::cos(pos / rate);
    }
  }
  return ad::Tensor::from({positions.size(), dim}, std::move(values));
}

}  // namespace hme::model
