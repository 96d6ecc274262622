#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hme/embedding/table.hpp"

namespace hme::embedding {

struct ManifestEntry {
  Level level = Level::word;
  std::string language;
  std::filesystem::path path;
  TextFormat format = TextFormat::vec_with_header;
  std::size_t dim = 0;  // 0: take whatever the file declares
  std::optional<std::size_t> limit;
  std::filesystem::path bpe_merges;  // subword entries only
};

// Order of entries within a level defines the language index j.
struct EmbeddingManifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> at_level(Level level) const;
};

struct EmbeddingStore {
  std::vector<EmbeddingTable> word;
  std::vector<EmbeddingTable> subword;
};

// Loads every word and subword table as frozen, zero-vector-OOV tables.
EmbeddingStore load_store(const EmbeddingManifest& manifest);

}  // namespace hme::embedding
