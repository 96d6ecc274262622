#pragma once

// Shared steps of the commands: building a tagger from a run config and
// loading CoNLL data against it.

#include <filesystem>
#include <vector>

#include "hme/cli/config.hpp"
#include "hme/model/tagger.hpp"
#include "hme/train/metrics.hpp"

namespace hme::cli {

struct Dataset {
  std::vector<text::TokenizedSentence> sentences;
  std::vector<model::Features> features;
  std::size_t repairs = 0;

  std::vector<std::vector<std::string>> gold() const;
};

// Tagged data must only use the tagger's labels; untagged lines are accepted
// otherwise.
Dataset load_dataset(const model::Tagger& tagger, const std::filesystem::path& path, bool tagged);

// Labels come from the train and dev tags; the character alphabet and the
// random-baseline vocabulary from the training words.
model::Tagger build_tagger(const RunConfig& config);

// Adds the data set's repair and OOV counters to `report`.
train::EvalReport with_counters(train::EvalReport report, const Dataset& data);

}  // namespace hme::cli
