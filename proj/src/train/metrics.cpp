#include "hme/train/metrics.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "hme/text/sentence.hpp"
#include "hme/util/error.hpp"

namespace hme::train {

std::vector<Span> extract_spans(const std::vector<std::string>& tags) {
  std::vector<Span> spans;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& t = tags[i];
    if (text::is_begin(t) || (text::is_inside(t) && !(open && spans.back().type == text::tag_type(t)))) {
      spans.push_back({i, i + 1, text::tag_type(t)});
      open = true;
    } else if (text::is_inside(t)) {
      spans.back().end = i + 1;
    } else {
      open = false;
    }
  }
  return spans;
}

double Counts::precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
double Counts::recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
double Counts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double EvalReport::token_accuracy() const {
  return tokens == 0 ? 0.0 : double(correct_tokens) / double(tokens);
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "precision " << fixed(precision()) << '\n'
      << "recall " << fixed(recall()) << '\n'
      << "f1 " << fixed(f1()) << '\n'
      << "tp " << total.tp << '\n'
      << "fp " << total.fp << '\n'
      << "fn " << total.fn << '\n'
      << "token_accuracy " << fixed(token_accuracy()) << '\n'
      << "sentences " << sentences << '\n'
      << "tokens " << tokens << '\n'
      << "repairs " << repairs << '\n'
      << "oov_words " << oov_words << '\n';
  for (const auto& [type, c] : per_type) {
    const std::string k = "type." + type + ".";
    out << k << "precision " << fixed(c.precision()) << '\n'
        << k << "recall " << fixed(c.recall()) << '\n'
        << k << "f1 " << fixed(c.f1()) << '\n'
        << k << "support " << c.tp + c.fn << '\n';
  }
  return out.str();
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["precision"] = precision();
  j["recall"] = recall();
  j["f1"] = f1();
  j["tp"] = total.tp;
  j["fp"] = total.fp;
  j["fn"] = total.fn;
  j["token_accuracy"] = token_accuracy();
  j["sentences"] = sentences;
  j["tokens"] = tokens;
  j["repairs"] = repairs;
  j["oov_words"] = oov_words;
  nlohmann::json types = nlohmann::json::object();
  for (const auto& [type, c] : per_type)
    types[type] = {{"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()},
                   {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
  j["per_type"] = types;
  return j;
}

EvalReport entity_f1(const std::vector<std::vector<std::string>>& gold,
                     const std::vector<std::vector<std::string>>& pred) {
  if (gold.size() != pred.size())
    throw InputError("evaluation: " + std::to_string(gold.size()) + " gold sentences but " +
                     std::to_string(pred.size()) + " predicted");
  EvalReport report;
  report.sentences = gold.size();
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size())
      throw InputError("evaluation: sentence " + std::to_string(s + 1) + " has " +
                       std::to_string(gold[s].size()) + " gold tags but " +
                       std::to_string(pred[s].size()) + " predicted");
    report.tokens += gold[s].size();
    for (std::size_t i = 0; i < gold[s].size(); ++i)
      if (gold[s][i] == pred[s][i]) ++report.correct_tokens;
    const auto g = extract_spans(gold[s]), p = extract_spans(pred[s]);
    const std::set<Span> gs(g.begin(), g.end()), ps(p.begin(), p.end());
    for (const auto& span : ps) {
      auto& c = report.per_type[span.type];
      if (gs.count(span)) {
        ++c.tp;
        ++report.total.tp;
      } else {
        ++c.fp;
        ++report.total.fp;
      }
    }
    for (const auto& span : gs)
      if (!ps.count(span)) {
        ++report.per_type[span.type].fn;
        ++report.total.fn;
      }
  }
  return report;
}

}  // namespace hme::train
