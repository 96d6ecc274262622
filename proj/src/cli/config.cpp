#include "hme/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "hme/model/checkpoint.hpp"
#include "hme/util/error.hpp"

namespace hme::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError("config: " + where + ": " + what);
}

void only_keys(const YAML::Node& node, const std::string& where, std::set<std::string> allowed) {
  if (!node.IsMap()) fail(where, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
  }
}

template <typename T>
T read(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(where, "invalid value '" + YAML::Dump(node) + "'");
  }
}

template <typename T>
void read_opt(const YAML::Node& parent, const char* key, const std::string& where, T& out) {
  if (const auto n = parent[key]) out = read<T>(n, where + "." + key);
}

std::size_t read_count(const YAML::Node& node, const std::string& where) {
  const auto v = read<long long>(node, where);
  if (v < 0) fail(where, "must be non-negative");
  return static_cast<std::size_t>(v);
}

void read_count_opt(const YAML::Node& parent, const char* key, const std::string& where,
                    std::size_t& out) {
  if (const auto n = parent[key]) out = read_count(n, where + "." + key);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["version"] = kConfigVersion;
  j["seed"] = seed;
  j["output_dir"] = output_dir.string();
  j["data"] = {{"train", train_path.string()}, {"dev", dev_path.string()}};
  if (test_path) j["data"]["test"] = test_path->string();
  j["embeddings"] = model::to_json(manifest);
  j["model"] = model::to_json(model);
  j["train"] = {{"learning_rate", train.learning_rate},
                {"beta1", train.beta1},
                {"beta2", train.beta2},
                {"eps", train.eps},
                {"patience", train.patience},
                {"patience_unit", train::patience_unit_name(train.patience_unit)},
                {"batch_size", train.batch_size},
                {"max_epochs", train.max_epochs},
                {"clip_norm", train.clip_norm}};
  if (train.lr_decay) j["train"]["lr_decay"] = *train.lr_decay;
  return j;
}

RunConfig parse_run_config(const std::string& yaml, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw InputError("config: YAML syntax error: " + std::string(e.what()));
  }
  only_keys(root, "top level", {"version", "seed", "output_dir", "data", "embeddings", "model", "train"});
  if (!root["version"]) fail("top level", "missing 'version'");
  if (read<int>(root["version"], "version") != kConfigVersion)
    fail("version", "unsupported config version (expected " + std::to_string(kConfigVersion) + ")");

  RunConfig c;
  read_opt(root, "seed", "top level", c.seed);
  if (const auto n = root["output_dir"]) c.output_dir = resolve(base_dir, read<std::string>(n, "output_dir"));
  else c.output_dir = resolve(base_dir, "run");

  const auto data = root["data"];
  if (!data) fail("top level", "missing 'data'");
  only_keys(data, "data", {"train", "dev", "test"});
  if (!data["train"] || !data["dev"]) fail("data", "'train' and 'dev' are required");
  c.train_path = resolve(base_dir, read<std::string>(data["train"], "data.train"));
  c.dev_path = resolve(base_dir, read<std::string>(data["dev"], "data.dev"));
  if (data["test"]) c.test_path = resolve(base_dir, read<std::string>(data["test"], "data.test"));

  if (const auto emb = root["embeddings"]) {
    if (!emb.IsSequence()) fail("embeddings", "expected a list");
    for (std::size_t k = 0; k < emb.size(); ++k) {
      const std::string where = "embeddings[" + std::to_string(k) + "]";
      const auto e = emb[k];
      only_keys(e, where, {"level", "language", "path", "format", "dim", "limit", "bpe_merges"});
      embedding::ManifestEntry entry;
      for (const char* key : {"level", "language", "path"})
        if (!e[key]) fail(where, std::string("missing '") + key + "'");
      try {
        entry.level = embedding::parse_level(read<std::string>(e["level"], where + ".level"));
        if (e["format"])
          entry.format = embedding::parse_format(read<std::string>(e["format"], where + ".format"));
      } catch (const InputError& err) {
        fail(where, err.what());
      }
      if (entry.level == embedding::Level::character)
        fail(where, "character tables are trainable and configured under model.char");
      entry.language = read<std::string>(e["language"], where + ".language");
      entry.path = resolve(base_dir, read<std::string>(e["path"], where + ".path"));
      read_count_opt(e, "dim", where, entry.dim);
      if (e["limit"]) entry.limit = read_count(e["limit"], where + ".limit");
      if (e["bpe_merges"]) {
        if (entry.level != embedding::Level::subword) fail(where, "bpe_merges only applies to subword tables");
        entry.bpe_merges = resolve(base_dir, read<std::string>(e["bpe_merges"], where + ".bpe_merges"));
      } else if (entry.level == embedding::Level::subword) {
        fail(where, "subword tables need 'bpe_merges'");
      }
      c.manifest.entries.push_back(entry);
    }
  }

  auto& m = c.model;
  bool subword_section = false, char_section = false;
  if (const auto model = root["model"]) {
    only_keys(model, "model", {"variant", "meta_dim", "d_model", "layers", "heads", "ff_dim",
                               "dropout", "random_dim", "subword", "char"});
    if (model["variant"]) {
      try {
        m.variant = model::parse_variant(read<std::string>(model["variant"], "model.variant"));
      } catch (const InputError& err) {
        fail("model.variant", err.what());
      }
    }
    read_count_opt(model, "meta_dim", "model", m.meta_dim);
    read_count_opt(model, "d_model", "model", m.d_model);
    read_count_opt(model, "layers", "model", m.layers);
    read_count_opt(model, "heads", "model", m.heads);
    read_count_opt(model, "ff_dim", "model", m.ff_dim);
    read_opt(model, "dropout", "model", m.dropout);
    read_count_opt(model, "random_dim", "model", m.random_dim);
    if (const auto s = model["subword"]) {
      subword_section = true;
      if (!s.IsNull()) {
        only_keys(s, "model.subword", {"layers", "heads"});
        read_count_opt(s, "layers", "model.subword", m.subword_layers);
        read_count_opt(s, "heads", "model.subword", m.subword_heads);
      }
    }
    if (const auto ch = model["char"]) {
      char_section = true;
      if (!ch.IsNull()) {
        only_keys(ch, "model.char", {"dim", "layers", "heads"});
        read_count_opt(ch, "dim", "model.char", m.char_dim);
        read_count_opt(ch, "layers", "model.char", m.char_layers);
        read_count_opt(ch, "heads", "model.char", m.char_heads);
      }
    }
  }
  if (m.variant != model::Variant::hme && (subword_section || char_section))
    fail("model", std::string("variant '") + std::string(model::variant_name(m.variant)) +
                      "' does not allow subword or char sections");
  m.use_subword = subword_section;
  m.use_char = char_section;
  const auto word_tables = c.manifest.at_level(embedding::Level::word).size();
  const auto subword_tables = c.manifest.at_level(embedding::Level::subword).size();
  if (m.variant != model::Variant::random && word_tables == 0)
    fail("embeddings", "variant '" + std::string(model::variant_name(m.variant)) +
                           "' needs at least one word-level table");
  if (m.subword_enabled() && subword_tables == 0)
    fail("embeddings", "model.subword is set but no subword-level tables are listed");
  try {
    m.validate();
  } catch (const InputError& err) {
    throw InputError(std::string("config: ") + err.what());
  }

  auto& t = c.train;
  if (const auto tr = root["train"]) {
    only_keys(tr, "train", {"learning_rate", "beta1", "beta2", "eps", "patience", "patience_unit",
                            "batch_size", "max_epochs", "clip_norm", "lr_decay"});
    read_opt(tr, "learning_rate", "train", t.learning_rate);
    read_opt(tr, "beta1", "train", t.beta1);
    read_opt(tr, "beta2", "train", t.beta2);
    read_opt(tr, "eps", "train", t.eps);
    read_count_opt(tr, "patience", "train", t.patience);
    if (tr["patience_unit"]) {
      try {
        t.patience_unit = train::parse_patience_unit(read<std::string>(tr["patience_unit"], "train.patience_unit"));
      } catch (const InputError& err) {
        fail("train.patience_unit", err.what());
      }
    }
    read_count_opt(tr, "batch_size", "train", t.batch_size);
    read_count_opt(tr, "max_epochs", "train", t.max_epochs);
    read_opt(tr, "clip_norm", "train", t.clip_norm);
    if (tr["lr_decay"]) t.lr_decay = read<double>(tr["lr_decay"], "train.lr_decay");
  }
  t.seed = c.seed;
  try {
    t.validate();
  } catch (const InputError& err) {
    throw InputError(std::string("config: ") + err.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), fs::absolute(path).parent_path());
}

void check_paths(const RunConfig& c) {
  auto need = [](const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw InputError("config: " + what + " not found: " + p.string());
  };
  need(c.train_path, "training data");
  need(c.dev_path, "dev data");
  if (c.test_path) need(*c.test_path, "test data");
  for (const auto& e : c.manifest.entries) {
    need(e.path, std::string(embedding::level_name(e.level)) + " embedding file");
    if (!e.bpe_merges.empty()) need(e.bpe_merges, "bpe merges file");
  }
}

}  // namespace hme::cli
