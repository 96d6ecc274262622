#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hme/text/bpe.hpp"
#include "hme/text/preprocess.hpp"

namespace hme::text {

struct TokenizedSentence {
  std::vector<std::string> raw_tokens;  // as read
  std::vector<std::string> words;       // after preprocess_token
  // subwords[j][i]: segmentation of word i by language j's BPE model.
  std::vector<std::vector<std::vector<std::string>>> subwords;
  std::vector<std::vector<std::string>> chars;  // per word
  std::vector<std::string> labels;              // empty when untagged

  std::size_t size() const { return words.size(); }
  bool tagged() const { return !labels.empty(); }
};

// Fills words and chars from raw tokens.
TokenizedSentence make_sentence(std::vector<std::string> raw_tokens,
                                std::vector<std::string> labels = {},
                                const PreprocessOptions& options = {});

// Fills subwords with every model's segmentation of every word.
void segment_sentence(TokenizedSentence& sentence, const std::vector<BpeModel>& models);

// IOB tag helpers. A tag is "O", "B-<type>", or "I-<type>".
bool is_valid_tag(std::string_view tag);
std::string tag_type(std::string_view tag);  // empty for O
bool is_begin(std::string_view tag);
bool is_inside(std::string_view tag);

// Rewrites I-x tags that do not continue a B-x/I-x span as B-x. Returns the
// number of rewrites.
std::size_t repair_iob(std::vector<std::string>& tags);

struct ConllOptions {
  // When set, every tag must belong to this set.
  std::optional<std::set<std::string>> label_vocabulary;
  // Accept "token" lines without a tag (prediction input).
  bool allow_untagged = false;
  PreprocessOptions preprocess;
};

struct ConllData {
  std::vector<TokenizedSentence> sentences;
  std::size_t repairs = 0;
};

// "token<TAB>tag" lines; blank lines separate sentences. Throws InputError on
// malformed lines or unknown tags.
ConllData read_conll(std::istream& in, const ConllOptions& options = {},
                     const std::string& source = "<stream>");
ConllData read_conll(const std::filesystem::path& path, const ConllOptions& options = {});

// One sentence per line, whitespace-separated tokens.
std::vector<TokenizedSentence> read_raw_text(const std::filesystem::path& path,
                                             const PreprocessOptions& options = {});

// Writes raw tokens with `tags[s]` (or the sentence labels when `tags` is empty).
void write_conll(std::ostream& out, const std::vector<TokenizedSentence>& sentences,
                 const std::vector<std::vector<std::string>>& tags = {});
void write_conll(const std::filesystem::path& path,
                 const std::vector<TokenizedSentence>& sentences,
                 const std::vector<std::vector<std::string>>& tags = {});

}  // namespace hme::text
