#include "hme/train/ensemble.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "hme/text/sentence.hpp"
#include "hme/util/error.hpp"

namespace hme::train {

std::vector<std::string> majority_vote(const std::vector<std::vector<std::string>>& predictions,
                                       const std::vector<double>& dev_f1) {
  if (predictions.empty()) throw InputError("majority vote needs at least one prediction");
  if (!dev_f1.empty() && dev_f1.size() != predictions.size())
    throw InputError("majority vote: one dev score per model is required");
  const std::size_t n = predictions.front().size();
  for (const auto& p : predictions)
    if (p.size() != n) throw InputError("majority vote: predictions differ in length");
  // Models ranked by dev F1, best first; stable so equal scores keep input order.
  std::vector<std::size_t> rank(predictions.size());
  for (std::size_t k = 0; k < rank.size(); ++k) rank[k] = k;
  if (!dev_f1.empty())
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return dev_f1[a] > dev_f1[b]; });

  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::string, std::size_t> votes;
    std::size_t top = 0;
    for (const auto& p : predictions) top = std::max(top, ++votes[p[i]]);
    for (std::size_t k : rank)
      if (votes[predictions[k][i]] == top) {
        out[i] = predictions[k][i];
        break;
      }
  }
  text::repair_iob(out);
  return out;
}

std::string AttentionSummary::to_tsv() const {
  std::ostringstream out;
  out << "tag\tcount";
  for (const auto& l : languages) out << '\t' << l;
  out << '\n';
  char buf[32];
  for (std::size_t t = 0; t < tags.size(); ++t) {
    out << tags[t] << '\t' << counts[t];
    for (double w : mean[t]) {
      std::snprintf(buf, sizeof buf, "%.6f", w);
      out << '\t' << buf;
    }
    out << '\n';
  }
  return out.str();
}

AttentionSummary attention_summary(const std::vector<std::string>& languages,
                                   const std::vector<TokenAttention>& tokens) {
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> groups;
  for (const auto& tok : tokens) {
    if (tok.weights.size() != languages.size())
      throw InputError("attention summary: weight count differs from language count");
    auto& [sum, count] = groups[tok.tag];
    if (sum.empty()) sum.assign(languages.size(), 0.0);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += tok.weights[j];
    ++count;
  }
  AttentionSummary s;
  s.languages = languages;
  for (auto& [tag, group] : groups) {
    auto& [sum, count] = group;
    for (double& w : sum) w /= static_cast<double>(count);
    s.tags.push_back(tag);
    s.mean.push_back(sum);
    s.counts.push_back(count);
  }
  return s;
}

}  // namespace hme::train
