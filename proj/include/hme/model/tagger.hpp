#pragma once

// Full sequence labeler: token representations from the configured
// embedding variant, a Transformer over the sentence, and a CRF on top.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hme/embedding/manifest.hpp"
#include "hme/embedding/table.hpp"
#include "hme/model/crf.hpp"
#include "hme/model/meta_embedder.hpp"
#include "hme/model/transformer.hpp"
#include "hme/text/bpe.hpp"
#include "hme/text/sentence.hpp"

namespace hme::model {

enum class Variant { hme, mme_word, concat, linear, random };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::hme;
  bool use_subword = true;  // hme only
  bool use_char = true;     // hme only
  std::size_t meta_dim = 200;
  std::size_t char_dim = 50;
  std::size_t random_dim = 300;
  std::size_t d_model = 200;
  std::size_t layers = 4;
  std::size_t heads = 4;
  std::size_t ff_dim = 800;
  double dropout = 0.1;
  std::size_t subword_layers = 1;
  std::size_t subword_heads = 4;
  std::size_t char_layers = 1;
  std::size_t char_heads = 4;

  bool subword_enabled() const { return variant == Variant::hme && use_subword; }
  bool char_enabled() const { return variant == Variant::hme && use_char; }
  bool word_tables_used() const { return variant != Variant::random; }
  // Throws InputError describing the first inconsistency.
  void validate() const;
};

// Pretrained inputs shared by every model built from one manifest.
struct TaggerResources {
  std::vector<embedding::EmbeddingTable> word;
  std::vector<embedding::EmbeddingTable> subword;
  std::vector<text::BpeModel> bpe;  // one per subword table
};

TaggerResources load_resources(const embedding::EmbeddingManifest& manifest);

// Everything the forward pass needs from one sentence. Frozen lookups are
// resolved here once so training epochs reuse them.
struct Features {
  std::size_t n = 0;
  std::vector<ad::Tensor> word;        // per word language, [n, d_j]
  std::vector<SegmentedRows> subword;  // per subword language
  std::vector<std::size_t> char_rows;
  std::vector<std::size_t> char_offsets;
  std::vector<std::size_t> random_rows;
  std::vector<std::size_t> gold;  // empty when untagged
  std::size_t oov_words = 0;      // words missing from every word table
};

struct TaggerOutput {
  ad::Tensor emissions;      // [n, T]
  ad::Tensor alpha_word;     // [n, L_w] when the variant attends over words
  ad::Tensor alpha_subword;  // [n, L_s] when subwords are enabled
};

class Tagger {
 public:
  // `char_alphabet` sizes the character table and `random_vocab` the random
  // baseline table; each is ignored when its component is disabled.
  Tagger(ModelConfig config, LabelSet labels, TaggerResources resources,
         const std::set<std::string>& char_alphabet, const std::set<std::string>& random_vocab,
         std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const LabelSet& labels() const { return labels_; }
  std::uint64_t seed() const { return seed_; }

  // Throws InputError when a gold tag is outside the label set.
  Features featurize(const text::TokenizedSentence& sentence) const;
  TaggerOutput forward(const Features& features, ForwardMode& mode) const;
  ad::Tensor loss(const Features& features, ForwardMode& mode) const;
  // Eval-mode Viterbi decoding; records nothing on the tape.
  std::vector<std::string> predict(const Features& features) const;
  // Eval-mode forward without gradients.
  TaggerOutput infer(const Features& features) const;

  // Trainable tensors in a stable order with unique names.
  ParameterList parameters() const;

  const std::vector<embedding::EmbeddingTable>& word_tables() const { return resources_.word; }
  const std::vector<embedding::EmbeddingTable>& subword_tables() const { return resources_.subword; }
  const std::vector<text::BpeModel>& bpe_models() const { return resources_.bpe; }
  const std::optional<embedding::EmbeddingTable>& char_table() const { return char_table_; }
  const std::optional<embedding::EmbeddingTable>& random_table() const { return random_table_; }

 private:
  ad::Tensor represent(const Features& f, ForwardMode& mode, TaggerOutput& out) const;

  ModelConfig config_;
  LabelSet labels_;
  TaggerResources resources_;
  std::uint64_t seed_;

  ProjectionSet word_proj_;
  AttentionScorer word_scorer_;
  ProjectionSet subword_proj_;
  TransformerEncoder subword_encoder_;
  AttentionScorer subword_scorer_;
  std::optional<embedding::EmbeddingTable> char_table_;
  Linear char_proj_;
  TransformerEncoder char_encoder_;
  std::optional<embedding::EmbeddingTable> random_table_;
  TransformerEncoder encoder_;
  Linear emission_;
  CrfParams crf_;
};

// Characters of every word in the sentences plus the special tokens.
std::set<std::string> collect_alphabet(const std::vector<text::TokenizedSentence>& sentences);
std::set<std::string> collect_vocabulary(const std::vector<text::TokenizedSentence>& sentences);

}  // namespace hme::model
