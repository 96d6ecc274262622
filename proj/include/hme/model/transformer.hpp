#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hme/model/layers.hpp"

namespace hme::model {

struct TransformerConfig {
  std::size_t input_dim = 200;
  std::size_t d_model = 200;
  std::size_t layers = 4;
  std::size_t heads = 4;
  std::size_t ff_dim = 800;
  double dropout = 0.1;
  bool input_projection = true;  // Linear input_dim -> d_model before the stack
  bool final_norm = true;        // LayerNorm after the last layer
};

struct MultiHeadAttention {
  Linear query, key, value, output;
  std::size_t heads = 1;

  // `mask` is an additive [S, S] matrix, or undefined for full attention.
  ad::Tensor forward(const ad::Tensor& x, const ad::Tensor& mask) const;
  void collect(ParameterList& out, const std::string& name) const;
};

// Pre-norm block: x + drop(attn(ln1(x))), then h + drop(ffn(ln2(h))).
struct EncoderLayer {
  LayerNorm norm1, norm2;
  MultiHeadAttention attention;
  Linear ff1, ff2;
  Dropout drop_attn, drop_ff;

  ad::Tensor forward(const ad::Tensor& x, const ad::Tensor& mask, ForwardMode& mode) const;
  void collect(ParameterList& out, const std::string& name) const;
};

// Rows of the input are grouped into contiguous segments (one sentence, or
// one word's subwords); attention never crosses a segment boundary and
// position encodings restart at every segment. With zero layers the encoder
// is the identity apart from the optional input projection.
class TransformerEncoder {
 public:
  TransformerEncoder() = default;
  TransformerEncoder(const TransformerConfig& config, std::uint64_t seed, const std::string& name);

  const TransformerConfig& config() const { return config_; }
  std::size_t output_dim() const { return config_.d_model; }

  // `offsets` = [0, e1, e2, ..., S]; empty means one segment.
  ad::Tensor forward(const ad::Tensor& x, std::span<const std::size_t> offsets,
                     ForwardMode& mode) const;

  void collect(ParameterList& out) const;

  const std::vector<EncoderLayer>& layers() const { return layers_; }
  const Linear* input_projection() const { return input_proj_ ? &*input_proj_ : nullptr; }
  const LayerNorm* final_norm() const { return final_norm_ ? &*final_norm_ : nullptr; }

 private:
  TransformerConfig config_;
  std::string name_;
  std::optional<Linear> input_proj_;
  std::vector<EncoderLayer> layers_;
  std::optional<LayerNorm> final_norm_;
  Dropout input_dropout_;
};

inline constexpr double kAttentionMask = -1e9;

// Additive block-diagonal mask for the given segments, or undefined for one.
ad::Tensor segment_mask(std::span<const std::size_t> offsets);
std::vector<std::size_t> segment_positions(std::span<const std::size_t> offsets, std::size_t rows);

}  // namespace hme::model
