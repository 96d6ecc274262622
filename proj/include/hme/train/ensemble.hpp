#pragma once

#include <string>
#include <vector>

namespace hme::train {

// Per-token plurality vote over K predictions of one sentence. Ties go to
// the tied tag predicted by the model with the highest dev F1 (the earliest
// such model if dev F1 also ties); the result is then IOB-repaired.
// `dev_f1` may be empty, in which case model order decides ties.
std::vector<std::string> majority_vote(const std::vector<std::vector<std::string>>& predictions,
                                       const std::vector<double>& dev_f1 = {});

struct TokenAttention {
  std::string tag;              // predicted tag
  std::vector<double> weights;  // one per language
};

// Mean attention weight per (tag, language) over all tokens with that tag.
struct AttentionSummary {
  std::vector<std::string> languages;
  std::vector<std::string> tags;               // sorted
  std::vector<std::vector<double>> mean;       // [tag][language]
  std::vector<std::size_t> counts;             // tokens per tag

  std::string to_tsv() const;
};

AttentionSummary attention_summary(const std::vector<std::string>& languages,
                                   const std::vector<TokenAttention>& tokens);

}  // namespace hme::train
