#include "hme/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "hme/util/error.hpp"

namespace hme::model {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[8] = {'H', 'M', 'E', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::string& source) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw InputError(source + ": truncated checkpoint");
  return v;
}

std::string get_string(std::istream& in, std::size_t len, const std::string& source) {
  if (len > (std::size_t{1} << 32)) throw InputError(source + ": corrupt checkpoint");
  std::string s(len, '\0');
  if (len && !in.read(s.data(), static_cast<std::streamsize>(len)))
    throw InputError(source + ": truncated checkpoint");
  return s;
}

std::set<std::string> table_tokens(const std::optional<embedding::EmbeddingTable>& t,
                                   bool skip_pad) {
  std::set<std::string> out;
  if (!t) return out;
  for (const auto& tok : t->tokens())
    if (!(skip_pad && tok == embedding::kPadSymbol)) out.insert(tok);
  return out;
}

std::vector<std::string> hashes(const std::vector<embedding::EmbeddingTable>& tables) {
  std::vector<std::string> out;
  for (const auto& t : tables) out.push_back(std::to_string(t.content_hash()));
  return out;
}

}  // namespace

nlohmann::json to_json(const ModelConfig& c) {
  return {{"variant", variant_name(c.variant)},
          {"use_subword", c.use_subword},
          {"use_char", c.use_char},
          {"meta_dim", c.meta_dim},
          {"char_dim", c.char_dim},
          {"random_dim", c.random_dim},
          {"d_model", c.d_model},
          {"layers", c.layers},
          {"heads", c.heads},
          {"ff_dim", c.ff_dim},
          {"dropout", c.dropout},
          {"subword_layers", c.subword_layers},
          {"subword_heads", c.subword_heads},
          {"char_layers", c.char_layers},
          {"char_heads", c.char_heads}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.use_subword = j.at("use_subword");
  c.use_char = j.at("use_char");
  c.meta_dim = j.at("meta_dim");
  c.char_dim = j.at("char_dim");
  c.random_dim = j.at("random_dim");
  c.d_model = j.at("d_model");
  c.layers = j.at("layers");
  c.heads = j.at("heads");
  c.ff_dim = j.at("ff_dim");
  c.dropout = j.at("dropout");
  c.subword_layers = j.at("subword_layers");
  c.subword_heads = j.at("subword_heads");
  c.char_layers = j.at("char_layers");
  c.char_heads = j.at("char_heads");
  return c;
}

nlohmann::json to_json(const embedding::EmbeddingManifest& manifest) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::json j{{"level", embedding::level_name(e.level)},
                     {"language", e.language},
                     {"path", e.path.string()},
                     {"format", embedding::format_name(e.format)},
                     {"dim", e.dim}};
    if (e.limit) j["limit"] = *e.limit;
    if (!e.bpe_merges.empty()) j["bpe_merges"] = e.bpe_merges.string();
    out.push_back(j);
  }
  return out;
}

embedding::EmbeddingManifest manifest_from_json(const nlohmann::json& j) {
  embedding::EmbeddingManifest m;
  for (const auto& e : j) {
    embedding::ManifestEntry entry;
    entry.level = embedding::parse_level(e.at("level").get<std::string>());
    entry.language = e.at("language");
    entry.path = e.at("path").get<std::string>();
    entry.format = embedding::parse_format(e.at("format").get<std::string>());
    entry.dim = e.at("dim");
    if (e.contains("limit")) entry.limit = e.at("limit").get<std::size_t>();
    if (e.contains("bpe_merges")) entry.bpe_merges = e.at("bpe_merges").get<std::string>();
    m.entries.push_back(entry);
  }
  return m;
}

void save_checkpoint(const std::filesystem::path& path, const Tagger& tagger,
                     const embedding::EmbeddingManifest& manifest,
                     const nlohmann::json& config_echo) {
  embedding::EmbeddingManifest absolute = manifest;
  for (auto& e : absolute.entries) {
    e.path = std::filesystem::absolute(e.path);
    if (!e.bpe_merges.empty()) e.bpe_merges = std::filesystem::absolute(e.bpe_merges);
  }
  nlohmann::json header{{"format_version", kCheckpointVersion},
                        {"seed", tagger.seed()},
                        {"model", to_json(tagger.config())},
                        {"labels", tagger.labels().tags()},
                        {"char_alphabet", table_tokens(tagger.char_table(), true)},
                        {"random_vocab", table_tokens(tagger.random_table(), false)},
                        {"manifest", to_json(absolute)},
                        {"word_table_hashes", hashes(tagger.word_tables())},
                        {"subword_table_hashes", hashes(tagger.subword_tables())},
                        {"config", config_echo}};
  const std::string text = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot write checkpoint");
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto params = tagger.parameters();
  put<std::uint64_t>(out, params.size());
  for (const auto& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.tensor.dim()));
    for (auto d : p.tensor.shape()) put<std::uint64_t>(out, d);
    const auto data = p.tensor.data();
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!out) throw InputError(path.string() + ": write failed");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string src = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(src + ": cannot open checkpoint");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw InputError(src + ": not a checkpoint file");
  const auto version = get<std::uint32_t>(in, src);
  if (version != kCheckpointVersion)
    throw InputError(src + ": unsupported checkpoint version " + std::to_string(version));
  const auto header_len = get<std::uint64_t>(in, src);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(get_string(in, header_len, src));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(src + ": bad checkpoint header: " + e.what());
  }

  try {
    auto manifest = manifest_from_json(header.at("manifest"));
    const ModelConfig config = model_config_from_json(header.at("model"));
    auto labels = LabelSet::from_list(header.at("labels").get<std::vector<std::string>>());
    TaggerResources resources = config.word_tables_used() || config.subword_enabled()
                                    ? load_resources(manifest)
                                    : TaggerResources{};
    if (hashes(resources.word) != header.at("word_table_hashes").get<std::vector<std::string>>() ||
        hashes(resources.subword) !=
            header.at("subword_table_hashes").get<std::vector<std::string>>())
      throw InputError(src + ": pretrained embedding files differ from those used in training");
    const auto alphabet = header.at("char_alphabet").get<std::set<std::string>>();
    const auto vocab = header.at("random_vocab").get<std::set<std::string>>();
    LoadedCheckpoint loaded{Tagger(config, std::move(labels), std::move(resources), alphabet, vocab,
                                   header.at("seed").get<std::uint64_t>()),
                            std::move(manifest), header.at("config")};

    std::map<std::string, ad::Tensor> by_name;
    for (const auto& p : loaded.tagger.parameters()) by_name.emplace(p.name, p.tensor);
    const auto count = get<std::uint64_t>(in, src);
    if (count != by_name.size())
      throw InputError(src + ": checkpoint holds " + std::to_string(count) +
                       " tensors but the model has " + std::to_string(by_name.size()));
    for (std::uint64_t k = 0; k < count; ++k) {
      const std::string name = get_string(in, get<std::uint32_t>(in, src), src);
      const auto rank = get<std::uint32_t>(in, src);
      ad::Shape shape;
      for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(get<std::uint64_t>(in, src));
      auto it = by_name.find(name);
      if (it == by_name.end()) throw InputError(src + ": unexpected tensor '" + name + "'");
      if (it->second.shape() != shape)
        throw InputError(src + ": tensor '" + name + "' has shape " + ad::shape_string(shape) +
                         ", model expects " + ad::shape_string(it->second.shape()));
      auto dst = it->second.mutable_data();
      if (!in.read(reinterpret_cast<char*>(dst.data()),
                   static_cast<std::streamsize>(dst.size() * sizeof(double))))
        throw InputError(src + ": truncated checkpoint");
    }
    return loaded;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(src + ": bad checkpoint header: " + e.what());
  }
}

}  // namespace hme::model
