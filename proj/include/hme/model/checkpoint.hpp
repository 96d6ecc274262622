#pragma once

// Binary checkpoint: the 8-byte magic "HMECKPT\0", a u32 format version, a
// length-prefixed JSON header (model config, labels, seed, vocabularies,
// embedding manifest, pretrained table hashes, caller-supplied config echo),
// then every trainable tensor as name, shape and little-endian f64 values.
// Pretrained tables are not stored; they are reloaded from the manifest and
// checked against the recorded hashes.

#include <filesystem>

#include "hme/embedding/manifest.hpp"
#include "hme/model/tagger.hpp"
#include "json.hpp"

namespace hme::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const embedding::EmbeddingManifest& manifest);
embedding::EmbeddingManifest manifest_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Tagger& tagger,
                     const embedding::EmbeddingManifest& manifest,
                     const nlohmann::json& config_echo = nlohmann::json::object());

struct LoadedCheckpoint {
  Tagger tagger;
  embedding::EmbeddingManifest manifest;
  nlohmann::json config_echo;
};

// Throws InputError on a bad file, a version mismatch, changed pretrained
// tables, or tensors that do not fit the rebuilt model.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hme::model
