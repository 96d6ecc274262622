#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace hme::train {

// Entity span covering tokens [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string type;

  auto operator<=>(const Span&) const = default;
};

// Maximal IOB spans. An I-x that does not continue an x span opens a new one.
std::vector<Span> extract_spans(const std::vector<std::string>& tags);

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;  // 0 when precision + recall is 0
};

struct EvalReport {
  Counts total;
  std::map<std::string, Counts> per_type;
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t correct_tokens = 0;
  std::size_t repairs = 0;
  std::size_t oov_words = 0;

  double precision() const { return total.precision(); }
  double recall() const { return total.recall(); }
  double f1() const { return total.f1(); }
  double token_accuracy() const;

  // "key value" lines, one per metric, per-type keys as "type.<name>.f1".
  std::string to_text() const;
  nlohmann::json to_json() const;
};

// Micro-averaged exact-match entity scores. Throws InputError when the
// corpora or any sentence pair differ in length.
EvalReport entity_f1(const std::vector<std::vector<std::string>>& gold,
                     const std::vector<std::vector<std::string>>& pred);

}  // namespace hme::train
