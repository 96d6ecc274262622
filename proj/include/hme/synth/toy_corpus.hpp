#pragma once

// Generator for a small code-switched NER corpus over two artificial
// languages, with matching pretrained-style word and subword tables and BPE
// merge lists. Entity tokens carry a type-specific suffix syllable that both
// languages' subword vocabularies share; dev and test use entity names never
// seen in training.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hme/embedding/table.hpp"
#include "hme/text/bpe.hpp"

namespace hme::synth {

struct ToyOptions {
  std::size_t sentences = 2000;  // split 80/10/10 into train/dev/test
  std::size_t dim = 50;
  std::uint64_t seed = 13;
};

struct ToySentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

struct ToyLanguage {
  std::string id;
  embedding::EmbeddingTable word;
  embedding::EmbeddingTable subword;
  std::vector<std::pair<std::string, std::string>> merges;
};

struct ToyCorpus {
  std::vector<ToySentence> train, dev, test;
  std::vector<ToyLanguage> languages;
};

// The nine entity types.
const std::vector<std::string>& toy_entity_types();

ToyCorpus generate_toy_corpus(const ToyOptions& options);

// Writes train/dev/test.conll, emb/{word,sub}.<lang>.vec, emb/bpe.<lang>.txt
// and a run config `config.yaml` with the scaled-down architecture.
void write_toy_corpus(const ToyCorpus& corpus, const std::filesystem::path& dir,
                      std::uint64_t seed);

}  // namespace hme::synth
