#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hme/autodiff/tensor.hpp"
#include "hme/model/layers.hpp"

namespace hme::model {

// Tag inventory: "O" first, then B-/I- pairs per entity type in sorted order.
class LabelSet {
 public:
  LabelSet() = default;
  static LabelSet from_types(const std::set<std::string>& types);
  // Types are read off B-x / I-x tags; throws InputError on non-IOB tags.
  static LabelSet from_tags(const std::set<std::string>& tags);
  static LabelSet from_list(std::vector<std::string> tags);

  std::size_t size() const { return tags_.size(); }
  const std::string& tag(std::size_t index) const { return tags_.at(index); }
  const std::vector<std::string>& tags() const { return tags_; }
  bool contains(const std::string& tag) const { return index_.count(tag) != 0; }
  // Throws InputError for unknown tags.
  std::size_t index(const std::string& tag) const;
  std::vector<std::size_t> encode(const std::vector<std::string>& tags) const;
  std::vector<std::string> decode(std::span<const std::size_t> indices) const;

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr double kForbidden = -1e9;

// Additive constraints: 0 where allowed, kForbidden where not.
struct TransitionMask {
  std::size_t tags = 0;
  std::vector<double> transition;  // [from * tags + to]
  std::vector<double> start;
  std::vector<double> end;

  static TransitionMask open(std::size_t tags);
  // O -> I-x, B-x -> I-y (x != y), I-x -> I-y (x != y), start -> I-x forbidden.
  static TransitionMask iob(const LabelSet& labels);
};

struct CrfParams {
  ad::Tensor transitions;  // [T, T], from row to column
  ad::Tensor start;        // [T]
  ad::Tensor end;          // [T]
  TransitionMask mask;

  static CrfParams create(const TransitionMask& mask);
  std::size_t tags() const { return mask.tags; }
  void collect(ParameterList& out, const std::string& name) const;
};

// Score of a tag path: start + emissions + transitions + end, masks included.
double path_score(std::span<const double> emissions, std::span<const std::size_t> path,
                  const CrfParams& crf);
// log of the sum of exp(path_score) over all paths (forward algorithm).
double log_partition(std::span<const double> emissions, std::size_t n, const CrfParams& crf);
bool is_allowed(std::span<const std::size_t> path, const TransitionMask& mask);

// logZ - score(gold). Gradients reach emissions, transitions, start and end
// through forward-backward marginals. Throws std::invalid_argument when gold
// uses a forbidden transition.
ad::Tensor crf_neg_log_likelihood(const ad::Tensor& emissions, const CrfParams& crf,
                                  std::span<const std::size_t> gold);

struct ViterbiResult {
  std::vector<std::size_t> tags;
  double score = 0.0;
};

// Highest-scoring path; among equal scores the lowest tag index wins at
// every backtracking step.
ViterbiResult viterbi_decode(std::span<const double> emissions, std::size_t n, const CrfParams& crf);
ViterbiResult viterbi_decode(const ad::Tensor& emissions, const CrfParams& crf);

}  // namespace hme::model
