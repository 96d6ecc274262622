#include "hme/embedding/table.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hme/autodiff/ops.hpp"
#include "hme/util/error.hpp"
#include "hme/util/hash.hpp"
#include "hme/util/random.hpp"
#include "hme/util/utf8.hpp"

namespace hme::embedding {

std::string_view level_name(Level level) {
  switch (level) {
    case Level::word: return "word";
    case Level::subword: return "subword";
    case Level::character: return "char";
  }
  return "word";
}

Level parse_level(std::string_view name) {
  if (name == "word") return Level::word;
  if (name == "subword") return Level::subword;
  if (name == "char") return Level::character;
  throw InputError("unknown embedding level '" + std::string(name) + "'");
}

std::string_view format_name(TextFormat format) {
  return format == TextFormat::vec_with_header ? "vec_with_header" : "glove_no_header";
}

TextFormat parse_format(std::string_view name) {
  if (name == "vec_with_header" || name == "vec") return TextFormat::vec_with_header;
  if (name == "glove_no_header" || name == "glove") return TextFormat::glove_no_header;
  throw InputError("unknown embedding format '" + std::string(name) + "'");
}

EmbeddingTable EmbeddingTable::create(Meta meta, std::size_t dim,
                                      const std::vector<std::string>& tokens,
                                      const std::vector<ad::Real>& values,
                                      std::optional<std::vector<ad::Real>> unk_row) {
  if (dim == 0) throw InputError("embedding dimension must be positive");
  if (values.size() != tokens.size() * dim)
    throw ShapeError("embedding values do not match " + std::to_string(tokens.size()) +
                     " rows of dim " + std::to_string(dim));
  const bool wants_unk = meta.oov == OovPolicy::trainable_unk;
  if (wants_unk != unk_row.has_value())
    throw std::invalid_argument("unk row must be given exactly for trainable_unk tables");
  if (unk_row && unk_row->size() != dim) throw ShapeError("unk row has the wrong width");

  EmbeddingTable table;
  table.meta_ = std::move(meta);
  table.dim_ = dim;
  std::vector<ad::Real> kept;
  kept.reserve(values.size() + dim);
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    if (!table.index_.emplace(tokens[r], table.tokens_.size()).second) continue;
    table.tokens_.push_back(tokens[r]);
    kept.insert(kept.end(), values.begin() + r * dim, values.begin() + (r + 1) * dim);
  }
  if (unk_row) kept.insert(kept.end(), unk_row->begin(), unk_row->end());
  if (kept.empty()) throw InputError("embedding table for '" + table.meta_.language + "' is empty");
  const std::size_t rows = kept.size() / dim;
  table.vectors_ = ad::Tensor::from({rows, dim}, std::move(kept), table.meta_.trainable);
  return table;
}

bool EmbeddingTable::contains(std::string_view token) const {
  return index_.count(std::string(token)) != 0;
}

std::size_t EmbeddingTable::find(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  if (auto it = index_.find(utf8::to_lower(token)); it != index_.end()) return it->second;
  return npos;
}

std::size_t EmbeddingTable::unk_row() const {
  return meta_.oov == OovPolicy::trainable_unk ? tokens_.size() : npos;
}

std::size_t EmbeddingTable::row_for(std::string_view token) const {
  const std::size_t row = find(token);
  return row != npos ? row : unk_row();
}

ad::Tensor EmbeddingTable::lookup(std::string_view token) const {
  const std::size_t row = row_for(token);
  if (row == npos) return ad::Tensor::zeros({dim_});
  const auto data = vectors_.data();
  return ad::Tensor::from({dim_}, std::vector<ad::Real>(data.begin() + row * dim_,
                                                        data.begin() + (row + 1) * dim_));
}

ad::Tensor EmbeddingTable::gather(std::span<const std::size_t> rows) const {
  if (meta_.trainable) return ad::gather_rows(vectors_, rows);
  std::vector<ad::Real> out(rows.size() * dim_, 0.0);
  const auto data = vectors_.data();
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i] != npos)
      std::copy_n(data.begin() + rows[i] * dim_, dim_, out.begin() + i * dim_);
  return ad::Tensor::from({rows.size(), dim_}, std::move(out));
}

ad::Tensor EmbeddingTable::lookup_rows(std::span<const std::string> tokens) const {
  std::vector<std::size_t> rows;
  rows.reserve(tokens.size());
  for (const auto& t : tokens) rows.push_back(row_for(t));
  if (meta_.trainable) {
    // Zero-vector OOV cannot occur on a trainable table's gradient path.
    for (std::size_t& r : rows)
      if (r == npos) throw std::logic_error("trainable table without an unk row");
  }
  return gather(rows);
}

std::uint64_t EmbeddingTable::content_hash() const {
  std::uint64_t h = hash_values(vectors_.data());
  for (const auto& t : tokens_) h = splitmix64(h ^ hash_string(t));
  return h;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

bool parse_real(std::string_view field, ad::Real& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& why) {
  throw InputError(path.string() + ":" + std::to_string(line) + ": " + why);
}

}  // namespace

EmbeddingTable load_text_embeddings(const std::filesystem::path& path, TextFormat format,
                                    EmbeddingTable::Meta meta, std::size_t expected_dim,
                                    std::optional<std::size_t> limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embedding file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  if (format == TextFormat::vec_with_header) {
    if (!std::getline(in, line)) throw InputError("embedding file " + path.string() + " is empty");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_fields(line);
    std::size_t count = 0;
    if (fields.size() != 2 ||
        std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), count).ec !=
            std::errc() ||
        std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), dim).ec !=
            std::errc() ||
        dim == 0)
      fail(path, line_no, "expected header 'count dim'");
    if (expected_dim != 0 && dim != expected_dim)
      fail(path, line_no,
           "header dim " + std::to_string(dim) + " differs from expected " +
               std::to_string(expected_dim));
  }
  std::vector<std::string> tokens;
  std::vector<ad::Real> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (limit && tokens.size() >= *limit) break;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    const std::size_t width = fields.size() - 1;
    if (dim == 0) {
      if (width == 0) fail(path, line_no, "row has no vector values");
      if (expected_dim != 0 && width != expected_dim)
        fail(path, line_no,
             "row has " + std::to_string(width) + " values, expected " +
                 std::to_string(expected_dim));
      dim = width;
    }
    if (width != dim)
      fail(path, line_no,
           "row has " + std::to_string(width) + " values, expected " + std::to_string(dim));
    tokens.emplace_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      ad::Real v = 0.0;
      if (!parse_real(fields[k], v))
        fail(path, line_no, "cannot parse number '" + std::string(fields[k]) + "'");
      values.push_back(v);
    }
  }
  if (tokens.empty()) throw InputError("embedding file " + path.string() + " has no rows");
  return EmbeddingTable::create(std::move(meta), dim, tokens, values);
}

void save_text_embeddings(const EmbeddingTable& table, const std::filesystem::path& path,
                          TextFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  const std::size_t d = table.dim();
  if (format == TextFormat::vec_with_header) out << table.vocab_size() << ' ' << d << '\n';
  const auto data = table.vectors().data();
  char buf[64];
  for (std::size_t r = 0; r < table.vocab_size(); ++r) {
    out << table.tokens()[r];
    for (std::size_t k = 0; k < d; ++k) {
      auto res = std::to_chars(buf, buf + sizeof buf, data[r * d + k]);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

namespace {

std::vector<ad::Real> uniform_rows(Rng& rng, std::size_t count) {
  std::vector<ad::Real> v(count);
  for (auto& x : v) x = rng.uniform(-0.1, 0.1);
  return v;
}

}  // namespace

EmbeddingTable init_char_table(const std::set<std::string>& alphabet, std::size_t dim,
                               std::uint64_t seed) {
  if (alphabet.empty()) throw InputError("character alphabet is empty");
  if (dim == 0) throw InputError("character embedding dimension must be positive");
  Rng rng(hash_key(seed, 0x636861727461626cULL));
  std::vector<std::string> tokens{std::string(kPadSymbol)};
  std::vector<ad::Real> values(dim, 0.0);
  for (const auto& symbol : alphabet) {
    if (symbol == kPadSymbol) continue;
    tokens.push_back(symbol);
    const auto row = uniform_rows(rng, dim);
    values.insert(values.end(), row.begin(), row.end());
  }
  auto unk = uniform_rows(rng, dim);
  return EmbeddingTable::create({"char", Level::character, true, OovPolicy::trainable_unk}, dim,
                                tokens, values, std::move(unk));
}

EmbeddingTable random_table(const std::set<std::string>& vocab, std::size_t dim,
                            std::uint64_t seed, std::string language) {
  if (vocab.empty()) throw InputError("random embedding vocabulary is empty");
  Rng rng(hash_key(seed, 0x72616e646f6dULL));
  std::vector<std::string> tokens(vocab.begin(), vocab.end());
  auto values = uniform_rows(rng, tokens.size() * dim);
  auto unk = uniform_rows(rng, dim);
  return EmbeddingTable::create({std::move(language), Level::word, true, OovPolicy::trainable_unk},
                                dim, tokens, values, std::move(unk));
}

EmbeddingTable with_extra_rows(const EmbeddingTable& table, std::span<const std::string> tokens,
                               std::uint64_t seed) {
  if (table.trainable() || table.oov_policy() != OovPolicy::zero_vector)
    throw std::invalid_argument("with_extra_rows expects a frozen zero-OOV table");
  std::vector<std::string> all = table.tokens();
  const auto data = table.vectors().data();
  std::vector<ad::Real> values(data.begin(), data.end());
  for (const auto& t : tokens) {
    if (table.contains(t)) continue;
    Rng rng(hash_key(seed, hash_string(t), hash_string(table.language())));
    const auto row = uniform_rows(rng, table.dim());
    all.push_back(t);
    values.insert(values.end(), row.begin(), row.end());
  }
  return EmbeddingTable::create({table.language(), table.level(), false, OovPolicy::zero_vector},
                                table.dim(), all, values);
}

}  // namespace hme::embedding
