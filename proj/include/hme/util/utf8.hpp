#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hme::utf8 {

// Decodes UTF-8 into codepoints. Invalid bytes decode to U+FFFD, one per byte.
std::vector<char32_t> decode(std::string_view s);

void append(std::string& out, char32_t cp);

std::string encode(char32_t cp);

// Splits into one string per codepoint, preserving the original bytes.
std::vector<std::string> split_codepoints(std::string_view s);

// Lowercases ASCII and Latin-1 / Latin Extended-A / Greek / Cyrillic capitals.
std::string to_lower(std::string_view s);

}  // namespace hme::utf8
