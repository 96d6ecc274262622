#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace hme {

// FNV-1a over raw bytes.
inline std::uint64_t fnv1a(std::span<const std::byte> bytes,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <class T>
std::uint64_t hash_values(std::span<const T> values) {
  return fnv1a(std::as_bytes(values));
}

inline std::uint64_t hash_string(std::string_view s) {
  return fnv1a(std::as_bytes(std::span<const char>(s.data(), s.size())));
}

}  // namespace hme
