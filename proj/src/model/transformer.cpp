#include "hme/model/transformer.hpp"

#include <cmath>

#include "hme/util/error.hpp"
#include "hme/util/hash.hpp"

namespace hme::model {

ad::Tensor MultiHeadAttention::forward(const ad::Tensor& x, const ad::Tensor& mask) const {
  const ad::Tensor q = query.forward(x);
  const ad::Tensor k = key.forward(x);
  const ad::Tensor v = value.forward(x);
  const std::size_t width = q.cols() / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(width));
  std::vector<ad::Tensor> contexts;
  contexts.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t b = h * width, e = b + width;
    const ad::Tensor qh = heads == 1 ? q : ad::slice_cols(q, b, e);
    const ad::Tensor kh = heads == 1 ? k : ad::slice_cols(k, b, e);
    const ad::Tensor vh = heads == 1 ? v : ad::slice_cols(v, b, e);
    ad::Tensor scores = ad::scale(ad::matmul_nt(qh, kh), inv_sqrt);
    if (mask.defined()) scores = ad::add(scores, mask);
    contexts.push_back(ad::matmul(ad::softmax(scores, 1), vh));
  }
  const ad::Tensor joined = heads == 1 ? contexts.front() : ad::concat(contexts, 1);
  return output.forward(joined);
}

void MultiHeadAttention::collect(ParameterList& out, const std::string& name) const {
  query.collect(out, name + ".query");
  key.collect(out, name + ".key");
  value.collect(out, name + ".value");
  output.collect(out, name + ".output");
}

ad::Tensor EncoderLayer::forward(const ad::Tensor& x, const ad::Tensor& mask,
                                 ForwardMode& mode) const {
  const ad::Tensor h =
      ad::add(x, drop_attn.forward(attention.forward(norm1.forward(x), mask), mode));
  const ad::Tensor ff = ff2.forward(ad::relu(ff1.forward(norm2.forward(h))));
  return ad::add(h, drop_ff.forward(ff, mode));
}

void EncoderLayer::collect(ParameterList& out, const std::string& name) const {
  norm1.collect(out, name + ".norm1");
  attention.collect(out, name + ".attention");
  norm2.collect(out, name + ".norm2");
  ff1.collect(out, name + ".ff1");
  ff2.collect(out, name + ".ff2");
}

TransformerEncoder::TransformerEncoder(const TransformerConfig& config, std::uint64_t seed,
                                       const std::string& name)
    : config_(config), name_(name) {
  if (config.d_model == 0) throw InputError(name + ": d_model must be positive");
  if (config.layers > 0 && (config.heads == 0 || config.d_model % config.heads != 0))
    throw InputError(name + ": d_model " + std::to_string(config.d_model) +
                     " is not divisible by " + std::to_string(config.heads) + " heads");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0))
    throw InputError(name + ": dropout must lie in [0, 1)");
  if (config.input_projection)
    input_proj_ = Linear::create(config.input_dim, config.d_model, seed, name + ".input");
  else if (config.input_dim != config.d_model)
    throw InputError(name + ": input dim differs from d_model and no input projection");
  const std::uint64_t base = hash_string(name);
  input_dropout_ = Dropout{config.dropout, base};
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = name + ".layer" + std::to_string(l);
    EncoderLayer layer;
    layer.norm1 = LayerNorm::create(config.d_model);
    layer.norm2 = LayerNorm::create(config.d_model);
    layer.attention.heads = config.heads;
    layer.attention.query = Linear::create(config.d_model, config.d_model, seed, p + ".attention.query");
    layer.attention.key = Linear::create(config.d_model, config.d_model, seed, p + ".attention.key");
    layer.attention.value = Linear::create(config.d_model, config.d_model, seed, p + ".attention.value");
    layer.attention.output =
        Linear::create(config.d_model, config.d_model, seed, p + ".attention.output");
    layer.ff1 = Linear::create(config.d_model, config.ff_dim, seed, p + ".ff1");
    layer.ff2 = Linear::create(config.ff_dim, config.d_model, seed, p + ".ff2");
    layer.drop_attn = Dropout{config.dropout, hash_string(p + ".drop_attn")};
    layer.drop_ff = Dropout{config.dropout, hash_string(p + ".drop_ff")};
    layers_.push_back(std::move(layer));
  }
  if (config.final_norm && config.layers > 0) final_norm_ = LayerNorm::create(config.d_model);
}

ad::Tensor segment_mask(std::span<const std::size_t> offsets) {
  if (offsets.size() <= 2) return {};
  const std::size_t s = offsets.back();
  std::vector<ad::Real> values(s * s, kAttentionMask);
  for (std::size_t g = 0; g + 1 < offsets.size(); ++g)
    for (std::size_t r = offsets[g]; r < offsets[g + 1]; ++r)
      for (std::size_t c = offsets[g]; c < offsets[g + 1]; ++c) values[r * s + c] = 0.0;
  return ad::Tensor::from({s, s}, std::move(values));
}

std::vector<std::size_t> segment_positions(std::span<const std::size_t> offsets,
                                           std::size_t rows) {
  std::vector<std::size_t> pos(rows);
  if (offsets.empty()) {
    for (std::size_t r = 0; r < rows; ++r) pos[r] = r;
    return pos;
  }
  for (std::size_t g = 0; g + 1 < offsets.size(); ++g)
    for (std::size_t r = offsets[g]; r < offsets[g + 1]; ++r) pos[r] = r - offsets[g];
  return pos;
}

ad::Tensor TransformerEncoder::forward(const ad::Tensor& x, std::span<const std::size_t> offsets,
                                       ForwardMode& mode) const {
  if (x.dim() != 2 || x.cols() != config_.input_dim)
    throw ShapeError(name_ + ": expected input width " + std::to_string(config_.input_dim) +
                     ", got " + ad::shape_string(x.shape()));
  if (!offsets.empty() && (offsets.front() != 0 || offsets.back() != x.rows()))
    throw ShapeError(name_ + ": segment offsets do not cover the input rows");
  ad::Tensor h = input_proj_ ? input_proj_->forward(x) : x;
  if (layers_.empty()) return h;
  const auto positions = segment_positions(offsets, x.rows());
  h = ad::add(h, position_encoding(positions, config_.d_model));
  h = input_dropout_.forward(h, mode);
  const ad::Tensor mask = segment_mask(offsets);
  for (const auto& layer : layers_) h = layer.forward(h, mask, mode);
  return final_norm_ ? final_norm_->forward(h) : h;
}

void TransformerEncoder::collect(ParameterList& out) const {
  if (input_proj_) input_proj_->collect(out, name_ + ".input");
  for (std::size_t l = 0; l < layers_.size(); ++l)
    layers_[l].collect(out, name_ + ".layer" + std::to_string(l));
  if (final_norm_) final_norm_->collect(out, name_ + ".final_norm");
}

}  // namespace hme::model
