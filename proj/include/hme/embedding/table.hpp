#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hme/autodiff/tensor.hpp"

namespace hme::embedding {

enum class Level { word, subword, character };
enum class OovPolicy { zero_vector, trainable_unk };
enum class TextFormat { vec_with_header, glove_no_header };

std::string_view level_name(Level level);
Level parse_level(std::string_view name);
std::string_view format_name(TextFormat format);
TextFormat parse_format(std::string_view name);

// One lookup table: a frozen pretrained table for one language, or a
// trainable table (characters, random baseline). Rows 0..|vocab|-1 belong to
// the vocabulary; a trainable_unk table carries one extra shared row last.
class EmbeddingTable {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  struct Meta {
    std::string language;
    Level level = Level::word;
    bool trainable = false;
    OovPolicy oov = OovPolicy::zero_vector;
  };

  // `values` holds |tokens| rows of `dim` entries. Duplicate tokens keep the
  // first occurrence. `unk_row` is required iff meta.oov == trainable_unk.
  static EmbeddingTable create(Meta meta, std::size_t dim, const std::vector<std::string>& tokens,
                               const std::vector<ad::Real>& values,
                               std::optional<std::vector<ad::Real>> unk_row = std::nullopt);

  const std::string& language() const { return meta_.language; }
  Level level() const { return meta_.level; }
  bool trainable() const { return meta_.trainable; }
  OovPolicy oov_policy() const { return meta_.oov; }
  std::size_t dim() const { return dim_; }
  std::size_t vocab_size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool contains(std::string_view token) const;

  // Exact match, then lowercase fallback; npos when neither is present.
  std::size_t find(std::string_view token) const;
  // Row serving `token`: find(), else the unk row, else npos (zero vector).
  std::size_t row_for(std::string_view token) const;
  std::size_t unk_row() const;

  // Vector for one token.
  ad::Tensor lookup(std::string_view token) const;
  // Matrix [tokens.size(), dim]. For trainable tables the result is connected
  // to the parameter matrix so gradients reach it; frozen tables give constants.
  ad::Tensor lookup_rows(std::span<const std::string> tokens) const;
  ad::Tensor gather(std::span<const std::size_t> rows) const;

  // Parameter matrix [rows, dim].
  const ad::Tensor& vectors() const { return vectors_; }
  ad::Tensor& vectors() { return vectors_; }

  std::uint64_t content_hash() const;

 private:
  Meta meta_;
  std::size_t dim_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  ad::Tensor vectors_;
};

// Reads a space-separated text table. `expected_dim` of 0 accepts any
// consistent width. Throws InputError naming the path and line on bad input.
EmbeddingTable load_text_embeddings(const std::filesystem::path& path, TextFormat format,
                                    EmbeddingTable::Meta meta, std::size_t expected_dim = 0,
                                    std::optional<std::size_t> limit = std::nullopt);

// Writes vocabulary rows (not the unk row) with round-trip precision.
void save_text_embeddings(const EmbeddingTable& table, const std::filesystem::path& path,
                          TextFormat format);

// Padding row 0 fixed at zero, then one row per alphabet symbol in sorted
// order, then a trainable unknown row; rows drawn from Uniform(-0.1, 0.1).
EmbeddingTable init_char_table(const std::set<std::string>& alphabet, std::size_t dim,
                               std::uint64_t seed);

inline constexpr std::string_view kPadSymbol = "<pad>";

// Trainable table over `vocab` with a trainable unk row, Uniform(-0.1, 0.1).
EmbeddingTable random_table(const std::set<std::string>& vocab, std::size_t dim,
                            std::uint64_t seed, std::string language = "random");

// Returns a copy of a frozen table with rows appended for any of `tokens`
// it lacks, drawn from Uniform(-0.1, 0.1) with a seed derived from the token.
EmbeddingTable with_extra_rows(const EmbeddingTable& table, std::span<const std::string> tokens,
                               std::uint64_t seed);

}  // namespace hme::embedding
