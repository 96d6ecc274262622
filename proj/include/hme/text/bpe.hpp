#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hme::text {

inline constexpr std::string_view kEndOfWord = "</w>";

struct Subword {
  std::string text;       // end-of-word marker stripped
  bool word_end = false;  // last piece of the word

  bool operator==(const Subword&) const = default;
};

// Ordered merge list; a merge's rank is its position.
class BpeModel {
 public:
  BpeModel() = default;
  BpeModel(std::string language, std::vector<std::pair<std::string, std::string>> merges);

  // One "left right" pair per line; a leading "#version" line is skipped.
  static BpeModel load(const std::filesystem::path& path, std::string language);

  const std::string& language() const { return language_; }
  std::size_t merge_count() const { return merges_.size(); }
  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }

  // Rank of merging (left, right), or npos.
  std::size_t rank(std::string_view left, std::string_view right) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::string language_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::unordered_map<std::string, std::size_t> ranks_;
};

// Starts from codepoints with </w> on the last one and merges the lowest-rank
// adjacent pair (leftmost on ties) until none applies. Special tokens are
// returned whole. Requires a non-empty word.
std::vector<Subword> apply_bpe(const BpeModel& model, std::string_view word);

// Just the piece strings.
std::vector<std::string> segment(const BpeModel& model, std::string_view word);

}  // namespace hme::text
