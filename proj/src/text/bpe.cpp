#include "hme/text/bpe.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hme/text/preprocess.hpp"
#include "hme/util/error.hpp"
#include "hme/util/utf8.hpp"

namespace hme::text {
namespace {

std::string pair_key(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left);
  key.push_back('\x1f');
  key.append(right);
  return key;
}

}  // namespace

BpeModel::BpeModel(std::string language, std::vector<std::pair<std::string, std::string>> merges)
    : language_(std::move(language)) {
  for (auto& m : merges) {
    auto key = pair_key(m.first, m.second);
    if (ranks_.count(key)) continue;
    ranks_.emplace(std::move(key), merges_.size());
    merges_.push_back(std::move(m));
  }
}

BpeModel BpeModel::load(const std::filesystem::path& path, std::string language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open BPE merges file " + path.string());
  std::vector<std::pair<std::string, std::string>> merges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("#version", 0) == 0) continue;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string left, right, extra;
    if (!(fields >> left >> right) || (fields >> extra))
      throw InputError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 'left right' merge pair");
    merges.emplace_back(std::move(left), std::move(right));
  }
  return BpeModel(std::move(language), std::move(merges));
}

std::size_t BpeModel::rank(std::string_view left, std::string_view right) const {
  auto it = ranks_.find(pair_key(left, right));
  return it == ranks_.end() ? npos : it->second;
}

std::vector<Subword> apply_bpe(const BpeModel& model, std::string_view word) {
  if (word.empty()) throw std::invalid_argument("apply_bpe: empty word");
  if (is_special_token(word)) return {Subword{std::string(word), true}};
  std::vector<std::string> symbols = utf8::split_codepoints(word);
  symbols.back().append(kEndOfWord);
  while (symbols.size() > 1) {
    std::size_t best = BpeModel::npos;
    std::size_t at = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      const std::size_t r = model.rank(symbols[i], symbols[i + 1]);
      if (r < best) {
        best = r;
        at = i;
      }
    }
    if (best == BpeModel::npos) break;
    symbols[at] += symbols[at + 1];
    symbols.erase(symbols.begin() + static_cast<std::ptrdiff_t>(at) + 1);
  }
  std::vector<Subword> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    Subword piece{std::move(symbols[i]), i + 1 == symbols.size()};
    if (piece.word_end) piece.text.resize(piece.text.size() - kEndOfWord.size());
    out.push_back(std::move(piece));
  }
  return out;
}

std::vector<std::string> segment(const BpeModel& model, std::string_view word) {
  std::vector<std::string> out;
  for (auto& piece : apply_bpe(model, word)) out.push_back(std::move(piece.text));
  return out;
}

}  // namespace hme::text
