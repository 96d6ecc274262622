#pragma once

// Run configuration file (YAML, format version 1):
//
//   version: 1
//   seed: 7
//   output_dir: run                 # relative paths resolve against this file
//   data: {train: train.conll, dev: dev.conll, test: test.conll}   # test optional
//   embeddings:                     # order within a level = language index
//     - {level: word, language: en, path: en.vec, format: vec_with_header, dim: 300, limit: 50000}
//     - {level: subword, language: en, path: en.bpe.vec, format: vec_with_header, dim: 100,
//        bpe_merges: en.merges}
//   model:
//     variant: hme                  # hme | mme_word | concat | linear | random
//     meta_dim: 200
//     d_model: 200
//     layers: 4
//     heads: 4
//     ff_dim: 800
//     dropout: 0.1
//     random_dim: 300               # random only
//     subword: {layers: 1, heads: 4}         # hme only; presence enables the level
//     char: {dim: 50, layers: 1, heads: 4}   # hme only; presence enables the level
//   train:
//     learning_rate: 0.1
//     beta1: 0.9
//     beta2: 0.999
//     eps: 1.0e-8
//     patience: 15
//     patience_unit: epochs         # epochs | steps
//     batch_size: 32
//     max_epochs: 100
//     clip_norm: 5.0
//     lr_decay: 0.5                 # optional
//
// Unknown keys are rejected.

#include <filesystem>
#include <optional>
#include <string>

#include "hme/embedding/manifest.hpp"
#include "hme/model/tagger.hpp"
#include "hme/train/trainer.hpp"
#include "json.hpp"

namespace hme::cli {

inline constexpr int kConfigVersion = 1;

struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "run";
  std::filesystem::path train_path, dev_path;
  std::optional<std::filesystem::path> test_path;
  embedding::EmbeddingManifest manifest;
  model::ModelConfig model;
  train::TrainConfig train;

  nlohmann::json to_json() const;
};

// Parses YAML text; relative paths are resolved against `base_dir`.
// Throws InputError with a "config:" prefixed message.
RunConfig parse_run_config(const std::string& yaml, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Throws InputError naming the first referenced file that does not exist.
void check_paths(const RunConfig& config);

}  // namespace hme::cli
