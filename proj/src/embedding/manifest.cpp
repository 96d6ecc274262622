#include "hme/embedding/manifest.hpp"

namespace hme::embedding {

std::vector<ManifestEntry> EmbeddingManifest::at_level(Level level) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.level == level) out.push_back(e);
  return out;
}

EmbeddingStore load_store(const EmbeddingManifest& manifest) {
  EmbeddingStore store;
  for (const auto& e : manifest.entries) {
    if (e.level == Level::character) continue;
    EmbeddingTable::Meta meta{e.language, e.level, false, OovPolicy::zero_vector};
    auto table = load_text_embeddings(e.path, e.format, std::move(meta), e.dim, e.limit);
    (e.level == Level::word ? store.word : store.subword).push_back(std::move(table));
  }
  return store;
}

}  // namespace hme::embedding
