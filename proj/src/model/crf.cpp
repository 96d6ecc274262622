#include "hme/model/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hme/autodiff/tensor.hpp"
#include "hme/text/sentence.hpp"
#include "hme/util/error.hpp"

namespace hme::model {

LabelSet LabelSet::from_types(const std::set<std::string>& types) {
  std::vector<std::string> tags{"O"};
  for (const auto& t : types) {
    tags.push_back("B-" + t);
    tags.push_back("I-" + t);
  }
  return from_list(std::move(tags));
}

LabelSet LabelSet::from_tags(const std::set<std::string>& tags) {
  std::set<std::string> types;
  for (const auto& t : tags) {
    if (!text::is_valid_tag(t)) throw InputError("'" + t + "' is not an IOB tag");
    if (t != "O") types.insert(text::tag_type(t));
  }
  return from_types(types);
}

LabelSet LabelSet::from_list(std::vector<std::string> tags) {
  LabelSet set;
  for (auto& t : tags) {
    if (!set.index_.emplace(t, set.tags_.size()).second)
      throw InputError("duplicate tag '" + t + "'");
    set.tags_.push_back(std::move(t));
  }
  return set;
}

std::size_t LabelSet::index(const std::string& tag) const {
  auto it = index_.find(tag);
  if (it == index_.end()) throw InputError("tag '" + tag + "' is not in the label vocabulary");
  return it->second;
}

std::vector<std::size_t> LabelSet::encode(const std::vector<std::string>& tags) const {
  std::vector<std::size_t> out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back(index(t));
  return out;
}

std::vector<std::string> LabelSet::decode(std::span<const std::size_t> indices) const {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(tags_.at(i));
  return out;
}

TransitionMask TransitionMask::open(std::size_t tags) {
  return {tags, std::vector<double>(tags * tags, 0.0), std::vector<double>(tags, 0.0),
          std::vector<double>(tags, 0.0)};
}

TransitionMask TransitionMask::iob(const LabelSet& labels) {
  TransitionMask mask = open(labels.size());
  const std::size_t t = labels.size();
  for (std::size_t to = 0; to < t; ++to) {
    const std::string& tag_to = labels.tag(to);
    if (!text::is_inside(tag_to)) continue;
    const std::string type = text::tag_type(tag_to);
    mask.start[to] = kForbidden;
    for (std::size_t from = 0; from < t; ++from) {
      const std::string& tag_from = labels.tag(from);
      const bool continues = tag_from != "O" && text::tag_type(tag_from) == type;
      if (!continues) mask.transition[from * t + to] = kForbidden;
    }
  }
  return mask;
}

CrfParams CrfParams::create(const TransitionMask& mask) {
  const std::size_t t = mask.tags;
  return {ad::Tensor::zeros({t, t}, true), ad::Tensor::zeros({t}, true),
          ad::Tensor::zeros({t}, true), mask};
}

void CrfParams::collect(ParameterList& out, const std::string& name) const {
  out.push_back({name + ".transitions", transitions});
  out.push_back({name + ".start", start});
  out.push_back({name + ".end", end});
}

namespace {

// Effective (parameter + mask) scores.
struct Scores {
  std::size_t t;
  std::vector<double> trans, start, end;
};

Scores effective(const CrfParams& crf) {
  const std::size_t t = crf.tags();
  Scores s{t, std::vector<double>(t * t), std::vector<double>(t), std::vector<double>(t)};
  const auto tr = crf.transitions.data();
  const auto st = crf.start.data();
  const auto en = crf.end.data();
  for (std::size_t k = 0; k < t * t; ++k) s.trans[k] = tr[k] + crf.mask.transition[k];
  for (std::size_t k = 0; k < t; ++k) {
    s.start[k] = st[k] + crf.mask.start[k];
    s.end[k] = en[k] + crf.mask.end[k];
  }
  return s;
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double x : v) total += std::exp(x - mx);
  return mx + std::log(total);
}

// alpha[i*t + k]: log-sum of scores of prefixes ending in tag k at i.
std::vector<double> forward_table(std::span<const double> em, std::size_t n, const Scores& s) {
  const std::size_t t = s.t;
  std::vector<double> alpha(n * t);
  for (std::size_t k = 0; k < t; ++k) alpha[k] = s.start[k] + em[k];
  std::vector<double> terms(t);
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t k = 0; k < t; ++k) {
      for (std::size_t p = 0; p < t; ++p) terms[p] = alpha[(i - 1) * t + p] + s.trans[p * t + k];
      alpha[i * t + k] = log_sum_exp(terms) + em[i * t + k];
    }
  return alpha;
}

// beta[i*t + k]: log-sum of scores of suffixes after tag k at i.
std::vector<double> backward_table(std::span<const double> em, std::size_t n, const Scores& s) {
  const std::size_t t = s.t;
  std::vector<double> beta(n * t);
  for (std::size_t k = 0; k < t; ++k) beta[(n - 1) * t + k] = s.end[k];
  std::vector<double> terms(t);
  for (std::size_t i = n - 1; i-- > 0;)
    for (std::size_t k = 0; k < t; ++k) {
      for (std::size_t q = 0; q < t; ++q)
        terms[q] = s.trans[k * t + q] + em[(i + 1) * t + q] + beta[(i + 1) * t + q];
      beta[i * t + k] = log_sum_exp(terms);
    }
  return beta;
}

double log_z_from(const std::vector<double>& alpha, std::size_t n, const Scores& s) {
  std::vector<double> last(s.t);
  for (std::size_t k = 0; k < s.t; ++k) last[k] = alpha[(n - 1) * s.t + k] + s.end[k];
  return log_sum_exp(last);
}

void check_emissions(std::size_t size, std::size_t n, const CrfParams& crf) {
  if (n == 0 || size != n * crf.tags())
    throw ShapeError("CRF emissions must be [n, " + std::to_string(crf.tags()) + "] with n >= 1");
}

}  // namespace

bool is_allowed(std::span<const std::size_t> path, const TransitionMask& mask) {
  if (path.empty()) return true;
  if (mask.start[path.front()] != 0.0 || mask.end[path.back()] != 0.0) return false;
  for (std::size_t i = 1; i < path.size(); ++i)
    if (mask.transition[path[i - 1] * mask.tags + path[i]] != 0.0) return false;
  return true;
}

double path_score(std::span<const double> emissions, std::span<const std::size_t> path,
                  const CrfParams& crf) {
  const std::size_t n = path.size();
  check_emissions(emissions.size(), n, crf);
  const Scores s = effective(crf);
  const std::size_t t = s.t;
  double score = s.start[path[0]] + s.end[path[n - 1]];
  for (std::size_t i = 0; i < n; ++i) {
    if (path[i] >= t) throw std::out_of_range("tag index outside label set");
    score += emissions[i * t + path[i]];
    if (i > 0) score += s.trans[path[i - 1] * t + path[i]];
  }
  return score;
}

double log_partition(std::span<const double> emissions, std::size_t n, const CrfParams& crf) {
  check_emissions(emissions.size(), n, crf);
  const Scores s = effective(crf);
  return log_z_from(forward_table(emissions, n, s), n, s);
}

ad::Tensor crf_neg_log_likelihood(const ad::Tensor& emissions, const CrfParams& crf,
                                  std::span<const std::size_t> gold) {
  const std::size_t t = crf.tags();
  if (emissions.dim() != 2 || emissions.cols() != t)
    throw ShapeError("CRF emissions must be [n, " + std::to_string(t) + "], got " +
                     ad::shape_string(emissions.shape()));
  const std::size_t n = emissions.rows();
  if (gold.size() != n) throw ShapeError("gold sequence length differs from emissions");
  for (std::size_t g : gold)
    if (g >= t) throw std::out_of_range("gold tag index outside label set");
  if (!is_allowed(gold, crf.mask))
    throw std::invalid_argument("gold tag sequence uses a forbidden transition");

  const Scores s = effective(crf);
  const auto em = emissions.data();
  auto alpha = forward_table(em, n, s);
  const double log_z = log_z_from(alpha, n, s);
  const double nll = log_z - path_score(em, gold, crf);

  std::vector<std::size_t> path(gold.begin(), gold.end());
  return ad::make_result(
      "crf_nll", {1}, {nll}, {emissions, crf.transitions, crf.start, crf.end},
      [n, t, s, alpha = std::move(alpha), log_z, path = std::move(path)](ad::Node& self) {
        const double g = self.grad[0];
        ad::Node& em_node = *self.inputs[0];
        const auto& em = em_node.value;
        const auto beta = backward_table(em, n, s);
        auto grad_of = [&](std::size_t k) -> std::span<double> {
          ad::Node& in = *self.inputs[k];
          return in.requires_grad ? in.grad_buffer() : std::span<double>{};
        };
        auto d_em = grad_of(0), d_tr = grad_of(1), d_st = grad_of(2), d_en = grad_of(3);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t k = 0; k < t; ++k) {
            const double marginal = std::exp(alpha[i * t + k] + beta[i * t + k] - log_z);
            if (!d_em.empty()) d_em[i * t + k] += g * marginal;
            if (i == 0 && !d_st.empty()) d_st[k] += g * marginal;
            if (i == n - 1 && !d_en.empty()) d_en[k] += g * marginal;
          }
        if (!d_tr.empty())
          for (std::size_t i = 1; i < n; ++i)
            for (std::size_t p = 0; p < t; ++p)
              for (std::size_t q = 0; q < t; ++q) {
                const double pair = std::exp(alpha[(i - 1) * t + p] + s.trans[p * t + q] +
                                             em[i * t + q] + beta[i * t + q] - log_z);
                d_tr[p * t + q] += g * pair;
              }
        for (std::size_t i = 0; i < n; ++i) {
          if (!d_em.empty()) d_em[i * t + path[i]] -= g;
          if (i > 0 && !d_tr.empty()) d_tr[path[i - 1] * t + path[i]] -= g;
        }
        if (!d_st.empty()) d_st[path.front()] -= g;
        if (!d_en.empty()) d_en[path.back()] -= g;
      });
}

ViterbiResult viterbi_decode(std::span<const double> emissions, std::size_t n,
                             const CrfParams& crf) {
  check_emissions(emissions.size(), n, crf);
  const Scores s = effective(crf);
  const std::size_t t = s.t;
  std::vector<double> best(n * t);
  std::vector<std::size_t> back(n * t, 0);
  for (std::size_t k = 0; k < t; ++k) best[k] = s.start[k] + emissions[k];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t k = 0; k < t; ++k) {
      std::size_t arg = 0;
      double top = best[(i - 1) * t] + s.trans[k];
      for (std::size_t p = 1; p < t; ++p) {
        const double cand = best[(i - 1) * t + p] + s.trans[p * t + k];
        if (cand > top) {
          top = cand;
          arg = p;
        }
      }
      best[i * t + k] = top + emissions[i * t + k];
      back[i * t + k] = arg;
    }
  std::size_t last = 0;
  double top = best[(n - 1) * t] + s.end[0];
  for (std::size_t k = 1; k < t; ++k) {
    const double cand = best[(n - 1) * t + k] + s.end[k];
    if (cand > top) {
      top = cand;
      last = k;
    }
  }
  ViterbiResult result;
  result.score = top;
  result.tags.assign(n, 0);
  result.tags[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) result.tags[i - 1] = back[i * t + result.tags[i]];
  return result;
}

ViterbiResult viterbi_decode(const ad::Tensor& emissions, const CrfParams& crf) {
  if (emissions.dim() != 2) throw ShapeError("CRF emissions must be a matrix");
  return viterbi_decode(emissions.data(), emissions.rows(), crf);
}

}  // namespace hme::model
