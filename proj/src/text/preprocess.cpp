#include "hme/text/preprocess.hpp"

#include <algorithm>

#include "hme/util/utf8.hpp"

namespace hme::text {

bool is_special_token(std::string_view token) {
  return token == kUserToken || token == kEmojiToken || token == kUrlToken;
}

std::vector<std::string> special_tokens() {
  return {std::string(kUserToken), std::string(kEmojiToken), std::string(kUrlToken)};
}

std::vector<CodepointRange> default_emoji_ranges() {
  return {
      {0x1F000, 0x1FAFF},  // mahjong .. symbols & pictographs extended-A
      {0x2600, 0x27BF},    // misc symbols, dingbats
      {0x2300, 0x23FF},    // misc technical (watch, hourglass, ...)
      {0x2B00, 0x2BFF},    // arrows, stars
      {0x200D, 0x200D},    // zero width joiner
      {0xFE0F, 0xFE0F},    // variation selector-16
      {0xE0020, 0xE007F},  // tag sequences
  };
}

namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  return std::equal(prefix.begin(), prefix.end(), s.begin(), [](char a, char b) {
    return a == static_cast<char>(std::tolower(static_cast<unsigned char>(b)));
  });
}

}  // namespace

std::string preprocess_token(std::string_view token, const PreprocessOptions& options) {
  if (token.empty()) return std::string(token);
  if (token.front() == '@' || token.front() == '#') return std::string(kUserToken);
  if (starts_with_ci(token, "http://") || starts_with_ci(token, "https://") ||
      starts_with_ci(token, "www."))
    return std::string(kUrlToken);
  const auto cps = utf8::decode(token);
  const bool all_emoji = std::all_of(cps.begin(), cps.end(), [&](char32_t cp) {
    return std::any_of(options.emoji_ranges.begin(), options.emoji_ranges.end(),
                       [cp](const CodepointRange& r) { return cp >= r.first && cp <= r.second; });
  });
  if (all_emoji) return std::string(kEmojiToken);
  return std::string(token);
}

std::vector<std::string> to_chars(std::string_view word) {
  if (is_special_token(word)) return {std::string(word)};
  return utf8::split_codepoints(word);
}

}  // namespace hme::text
