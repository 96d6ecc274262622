#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hme::text {

inline constexpr std::string_view kUserToken = "<USR>";
inline constexpr std::string_view kEmojiToken = "<EMOJI>";
inline constexpr std::string_view kUrlToken = "<URL>";

bool is_special_token(std::string_view token);
std::vector<std::string> special_tokens();

using CodepointRange = std::pair<char32_t, char32_t>;  // inclusive

// Emoji blocks, dingbats, regional indicators, and the joiner / variation
// selector codepoints that glue emoji sequences together.
std::vector<CodepointRange> default_emoji_ranges();

struct PreprocessOptions {
  std::vector<CodepointRange> emoji_ranges = default_emoji_ranges();
};

// Mentions and hashtags -> <USR>, URLs -> <URL>, all-emoji tokens -> <EMOJI>.
std::string preprocess_token(std::string_view token, const PreprocessOptions& options = {});

// One entry per codepoint; special tokens stay a single pseudo-character.
std::vector<std::string> to_chars(std::string_view word);

}  // namespace hme::text
