#include "hme/text/sentence.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hme/util/error.hpp"

namespace hme::text {

TokenizedSentence make_sentence(std::vector<std::string> raw_tokens,
                                std::vector<std::string> labels,
                                const PreprocessOptions& options) {
  if (!labels.empty() && labels.size() != raw_tokens.size())
    throw InputError("sentence has " + std::to_string(raw_tokens.size()) + " tokens but " +
                     std::to_string(labels.size()) + " labels");
  TokenizedSentence s;
  s.words.reserve(raw_tokens.size());
  for (const auto& t : raw_tokens) {
    if (t.empty()) throw InputError("empty token");
    s.words.push_back(preprocess_token(t, options));
    s.chars.push_back(to_chars(s.words.back()));
  }
  s.raw_tokens = std::move(raw_tokens);
  s.labels = std::move(labels);
  return s;
}

void segment_sentence(TokenizedSentence& sentence, const std::vector<BpeModel>& models) {
  sentence.subwords.assign(models.size(), {});
  for (std::size_t j = 0; j < models.size(); ++j) {
    auto& per_word = sentence.subwords[j];
    per_word.reserve(sentence.words.size());
    for (const auto& w : sentence.words) per_word.push_back(segment(models[j], w));
  }
}

bool is_begin(std::string_view tag) { return tag.size() > 2 && tag.substr(0, 2) == "B-"; }
bool is_inside(std::string_view tag) { return tag.size() > 2 && tag.substr(0, 2) == "I-"; }

bool is_valid_tag(std::string_view tag) { return tag == "O" || is_begin(tag) || is_inside(tag); }

std::string tag_type(std::string_view tag) {
  if (is_begin(tag) || is_inside(tag)) return std::string(tag.substr(2));
  return {};
}

std::size_t repair_iob(std::vector<std::string>& tags) {
  std::size_t repairs = 0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!is_inside(tags[i])) continue;
    const std::string type = tag_type(tags[i]);
    const bool continues =
        i > 0 && (is_begin(tags[i - 1]) || is_inside(tags[i - 1])) && tag_type(tags[i - 1]) == type;
    if (!continues) {
      tags[i] = "B-" + type;
      ++repairs;
    }
  }
  return repairs;
}

ConllData read_conll(std::istream& in, const ConllOptions& options, const std::string& source) {
  ConllData data;
  std::vector<std::string> tokens, tags;
  bool any_tagged = false, any_untagged = false;
  auto flush = [&]() {
    if (tokens.empty()) return;
    if (any_tagged && any_untagged)
      throw InputError(source + ": sentence mixes tagged and untagged lines");
    if (any_tagged) data.repairs += repair_iob(tags);
    data.sentences.push_back(make_sentence(std::move(tokens), any_tagged ? std::move(tags)
                                                                         : std::vector<std::string>{},
                                           options.preprocess));
    tokens.clear();
    tags.clear();
    any_tagged = any_untagged = false;
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto where = source + ":" + std::to_string(line_no);
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      if (!options.allow_untagged) throw InputError(where + ": expected 'token<TAB>tag'");
      tokens.push_back(line);
      any_untagged = true;
      continue;
    }
    std::string token = line.substr(0, tab);
    std::string tag = line.substr(tab + 1);
    if (token.empty() || tag.empty() || tag.find('\t') != std::string::npos)
      throw InputError(where + ": expected 'token<TAB>tag'");
    if (!is_valid_tag(tag)) throw InputError(where + ": '" + tag + "' is not an IOB tag");
    if (options.label_vocabulary && !options.label_vocabulary->count(tag))
      throw InputError(where + ": unknown tag '" + tag + "'");
    tokens.push_back(std::move(token));
    tags.push_back(std::move(tag));
    any_tagged = true;
  }
  flush();
  return data;
}

ConllData read_conll(const std::filesystem::path& path, const ConllOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_conll(in, options, path.string());
}

std::vector<TokenizedSentence> read_raw_text(const std::filesystem::path& path,
                                             const PreprocessOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<TokenizedSentence> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(std::move(t));
    if (!tokens.empty()) out.push_back(make_sentence(std::move(tokens), {}, options));
  }
  return out;
}

void write_conll(std::ostream& out, const std::vector<TokenizedSentence>& sentences,
                 const std::vector<std::vector<std::string>>& tags) {
  if (!tags.empty() && tags.size() != sentences.size())
    throw std::invalid_argument("write_conll: one tag sequence per sentence required");
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& sent = sentences[s];
    const auto& seq = tags.empty() ? sent.labels : tags[s];
    if (!seq.empty() && seq.size() != sent.raw_tokens.size())
      throw std::invalid_argument("write_conll: tag count differs from token count");
    for (std::size_t i = 0; i < sent.raw_tokens.size(); ++i) {
      out << sent.raw_tokens[i];
      if (!seq.empty()) out << '\t' << seq[i];
      out << '\n';
    }
    out << '\n';
  }
}

void write_conll(const std::filesystem::path& path,
                 const std::vector<TokenizedSentence>& sentences,
                 const std::vector<std::vector<std::string>>& tags) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_conll(out, sentences, tags);
}

}  // namespace hme::text
