#pragma once

// Attention-weighted combination of per-language embeddings.
//
// For token i and language j the embedding x_ij is projected into a shared
// space, x'_ij = W_j x_ij + b_j. Each projected vector gets a scalar score
// v . tanh(x'_ij); a softmax over languages turns the scores into weights
// alpha_ij and the token representation is u_i = sum_j alpha_ij x'_ij.
// At the subword level a shared Transformer runs over each word's projected
// subword sequence and is mean-pooled before the same weighting.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hme/model/layers.hpp"
#include "hme/model/transformer.hpp"

namespace hme::model {

// One projection W_j: d_j -> d' per language.
struct ProjectionSet {
  std::vector<Linear> per_language;

  static ProjectionSet create(std::span<const std::size_t> input_dims, std::size_t out_dim,
                              std::uint64_t seed, const std::string& name);
  std::size_t languages() const { return per_language.size(); }
  std::size_t out_dim() const { return per_language.front().out_dim(); }
  void collect(ParameterList& out, const std::string& name) const;
};

// score(x') = tanh(x') . v, one scalar per row.
struct AttentionScorer {
  ad::Tensor v;  // [d', 1]

  static AttentionScorer create(std::size_t dim, std::uint64_t seed, const std::string& name);
  ad::Tensor score(const ad::Tensor& projected) const;
  void collect(ParameterList& out, const std::string& name) const;
};

struct MmeResult {
  ad::Tensor u;      // [n, d']
  ad::Tensor alpha;  // [n, L]
};

// Weighted sum of projected[j] with weights softmax(scores) row by row.
MmeResult attend(std::span<const ad::Tensor> projected, const ad::Tensor& scores);
MmeResult combine(std::span<const ad::Tensor> projected, const AttentionScorer& scorer);

// Word-level meta-embedding from raw per-language embeddings [n, d_j].
MmeResult mme_word(std::span<const ad::Tensor> embeddings, const ProjectionSet& projections,
                   const AttentionScorer& scorer);

// Rows of several variable-length sequences stacked: sequence g occupies
// rows [offsets[g], offsets[g+1]).
struct SegmentedRows {
  ad::Tensor rows;
  std::vector<std::size_t> offsets;

  std::size_t segments() const { return offsets.size() - 1; }
};

// Subword-level meta-embedding. `per_language[j]` holds language j's subword
// embeddings with one segment per word; all languages cover the same words.
MmeResult mme_subword(std::span<const SegmentedRows> per_language,
                      const ProjectionSet& projections, const TransformerEncoder& encoder,
                      const AttentionScorer& scorer, ForwardMode& mode);

// Character encoder: project each character embedding, run the encoder over
// each word's characters and mean-pool, giving [n, d'].
ad::Tensor char_encode(const SegmentedRows& char_embeddings, const Linear& projection,
                       const TransformerEncoder& encoder, ForwardMode& mode);

// Row-wise concatenation in order (word, subword, char); undefined parts skipped.
ad::Tensor hme_concat(const ad::Tensor& u_word, const ad::Tensor& u_subword,
                      const ad::Tensor& u_char);

// Raw embeddings side by side, in manifest order.
ad::Tensor concat_baseline(std::span<const ad::Tensor> embeddings);
// Unweighted sum of the projected embeddings.
ad::Tensor linear_baseline(std::span<const ad::Tensor> embeddings, const ProjectionSet& projections);

}  // namespace hme::model
