#include "hme/synth/toy_corpus.hpp"

#include <fstream>
#include <map>
#include <set>

#include "hme/text/sentence.hpp"
#include "hme/util/error.hpp"
#include "hme/util/random.hpp"

namespace hme::synth {

namespace {

const std::vector<std::string> kTypes{"event", "group", "loc", "org", "other",
                                      "per",   "prod",  "time", "title"};
// One suffix syllable per type, shared by both languages.
const std::vector<std::string> kSuffix{"jul", "dro", "vex", "qim", "nyr",
                                       "zu",  "wox", "hep", "fya"};
const std::vector<std::string> kStemSyllables{"ar", "en", "is", "ol", "um", "an", "ed", "or", "ix", "ay"};
const std::vector<std::vector<std::string>> kSyllables{
    {"ka", "lo", "mi", "ne", "ta", "ri", "so", "pe", "la", "mo", "ni", "tu"},
    {"ber", "sch", "ten", "gar", "wil", "dor", "ken", "rat", "mel", "hol", "stu", "bri"}};
const std::vector<std::string> kLanguageIds{"la", "lb"};
const std::vector<std::string> kExtras{"@ana", "#viernes", "http://t.co/x1", "\xF0\x9F\x98\x80"};

constexpr std::size_t kWordsPerLanguage = 150;
constexpr std::size_t kNamesPerType = 40;
constexpr std::size_t kTrainNames = 24;
constexpr std::size_t kWordClusters = 6;

std::string pick(Rng& rng, const std::vector<std::string>& v) { return v[rng.below(v.size())]; }

std::vector<double> noisy(Rng& rng, const std::vector<double>& centre, double noise) {
  std::vector<double> out(centre.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = centre[k] + rng.uniform(-noise, noise);
  return out;
}

std::vector<double> random_vector(Rng& rng, std::size_t dim, double scale) {
  std::vector<double> out(dim);
  for (auto& v : out) v = rng.uniform(-scale, scale);
  return out;
}

// Codepoints of a syllable (ASCII here).
std::vector<std::string> letters(const std::string& s) { return text::to_chars(s); }

// Merges that build each syllable left to right, both mid-word and as the
// final piece of a word.
std::vector<std::pair<std::string, std::string>> syllable_merges(
    const std::vector<std::string>& syllables) {
  std::vector<std::pair<std::string, std::string>> mid, end;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& s : syllables) {
    const auto cs = letters(s);
    std::string prefix = cs[0];
    for (std::size_t k = 1; k < cs.size(); ++k) {
      if (seen.insert({prefix, cs[k]}).second) mid.emplace_back(prefix, cs[k]);
      const std::pair<std::string, std::string> fin{prefix, cs[k] + std::string(text::kEndOfWord)};
      if (k + 1 == cs.size() && seen.insert(fin).second) end.push_back(fin);
      prefix += cs[k];
    }
  }
  mid.insert(mid.end(), end.begin(), end.end());
  return mid;
}

}  // namespace

const std::vector<std::string>& toy_entity_types() { return kTypes; }

ToyCorpus generate_toy_corpus(const ToyOptions& options) {
  if (options.sentences < 10) throw InputError("toy corpus needs at least 10 sentences");
  if (options.dim == 0) throw InputError("toy corpus dim must be positive");
  Rng rng(hash_key(options.seed, 0x70795));
  const std::size_t dim = options.dim;

  // Ordinary vocabulary per language and its cluster.
  std::vector<std::vector<std::string>> words(2);
  std::map<std::string, std::size_t> cluster;
  for (std::size_t l = 0; l < 2; ++l) {
    std::set<std::string> seen;
    while (words[l].size() < kWordsPerLanguage) {
      std::string w;
      const std::size_t n = 1 + rng.below(3);
      for (std::size_t k = 0; k < n; ++k) w += pick(rng, kSyllables[l]);
      if (seen.insert(w).second) {
        words[l].push_back(w);
        cluster[w] = rng.below(kWordClusters);
      }
    }
  }
  // Entity names: stem + type suffix; the first kTrainNames per type are for training.
  std::vector<std::vector<std::string>> names(kTypes.size());
  for (std::size_t t = 0; t < kTypes.size(); ++t) {
    std::set<std::string> seen;
    while (names[t].size() < kNamesPerType) {
      std::string w;
      const std::size_t n = 1 + rng.below(2);
      for (std::size_t k = 0; k < n; ++k) w += pick(rng, kStemSyllables);
      w += kSuffix[t];
      if (seen.insert(w).second) names[t].push_back(w);
    }
  }

  auto make_sentence = [&](bool train_names) {
    ToySentence s;
    std::size_t lang = rng.below(2);
    const std::size_t length = 6 + rng.below(9);
    bool after_entity = true;  // no entity at the very start half the time
    if (rng.below(2) == 0) after_entity = false;
    while (s.tokens.size() < length) {
      if (rng.below(5) == 0) lang = 1 - lang;  // code-switch point
      if (!after_entity && rng.below(4) == 0) {
        const std::size_t t = rng.below(kTypes.size());
        const std::size_t span = 1 + (rng.below(3) == 0) + (rng.below(6) == 0);
        for (std::size_t k = 0; k < span; ++k) {
          const std::size_t idx = train_names ? rng.below(kTrainNames)
                                              : kTrainNames + rng.below(kNamesPerType - kTrainNames);
          std::string name = names[t][idx];
          if (rng.below(2) == 0) name[0] = static_cast<char>(name[0] - 'a' + 'A');
          s.tokens.push_back(name);
          s.tags.push_back((k == 0 ? "B-" : "I-") + kTypes[t]);
        }
        after_entity = true;
        continue;
      }
      s.tokens.push_back(rng.below(25) == 0 ? pick(rng, kExtras) : pick(rng, words[lang]));
      s.tags.push_back("O");
      after_entity = false;
    }
    return s;
  };

  ToyCorpus corpus;
  const std::size_t dev_n = options.sentences / 10, test_n = options.sentences / 10;
  const std::size_t train_n = options.sentences - dev_n - test_n;
  for (std::size_t i = 0; i < train_n; ++i) corpus.train.push_back(make_sentence(true));
  for (std::size_t i = 0; i < dev_n; ++i) corpus.dev.push_back(make_sentence(false));
  for (std::size_t i = 0; i < test_n; ++i) corpus.test.push_back(make_sentence(false));

  // Tables: each language has its own random space.
  for (std::size_t l = 0; l < 2; ++l) {
    Rng trng(hash_key(options.seed, 0x7ab1e, l));
    std::vector<std::vector<double>> type_centre, cluster_centre;
    for (std::size_t t = 0; t < kTypes.size(); ++t) type_centre.push_back(random_vector(trng, dim, 1.0));
    for (std::size_t c = 0; c < kWordClusters; ++c) cluster_centre.push_back(random_vector(trng, dim, 1.0));

    std::vector<std::string> wtok;
    std::vector<double> wval;
    auto add = [](std::vector<std::string>& toks, std::vector<double>& vals, const std::string& t,
                  const std::vector<double>& v) {
      toks.push_back(t);
      vals.insert(vals.end(), v.begin(), v.end());
    };
    for (const auto& w : words[l]) add(wtok, wval, w, noisy(trng, cluster_centre[cluster[w]], 0.6));
    // Pretrained vocabularies cover most, not all, entity names.
    for (std::size_t t = 0; t < kTypes.size(); ++t)
      for (const auto& name : names[t])
        if (trng.below(10) < 6) add(wtok, wval, name, noisy(trng, type_centre[t], 0.6));

    std::vector<std::string> stok;
    std::vector<double> sval;
    std::set<std::string> sub_seen;
    auto add_sub = [&](const std::string& t, const std::vector<double>& v) {
      if (sub_seen.insert(t).second) add(stok, sval, t, v);
    };
    for (std::size_t t = 0; t < kTypes.size(); ++t) add_sub(kSuffix[t], noisy(trng, type_centre[t], 0.3));
    for (const auto& s : kSyllables[l]) add_sub(s, random_vector(trng, dim, 1.0));
    for (const auto& s : kStemSyllables) add_sub(s, random_vector(trng, dim, 1.0));
    for (char c = 'a'; c <= 'z'; ++c) add_sub(std::string(1, c), random_vector(trng, dim, 0.3));

    std::vector<std::string> all_syllables = kSyllables[l];
    all_syllables.insert(all_syllables.end(), kStemSyllables.begin(), kStemSyllables.end());
    all_syllables.insert(all_syllables.end(), kSuffix.begin(), kSuffix.end());

    using embedding::EmbeddingTable;
    using embedding::Level;
    ToyLanguage lang{kLanguageIds[l],
                     EmbeddingTable::create({kLanguageIds[l], Level::word, false,
                                             embedding::OovPolicy::zero_vector},
                                            dim, wtok, wval),
                     EmbeddingTable::create({kLanguageIds[l], Level::subword, false,
                                             embedding::OovPolicy::zero_vector},
                                            dim, stok, sval),
                     syllable_merges(all_syllables)};
    corpus.languages.push_back(std::move(lang));
  }
  return corpus;
}

void write_toy_corpus(const ToyCorpus& corpus, const std::filesystem::path& dir,
                      std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "emb");
  auto write_split = [&](const std::vector<ToySentence>& split, const std::string& name) {
    std::ofstream out(dir / name);
    for (const auto& s : split) {
      for (std::size_t i = 0; i < s.tokens.size(); ++i) out << s.tokens[i] << '\t' << s.tags[i] << '\n';
      out << '\n';
    }
    if (!out) throw InputError((dir / name).string() + ": write failed");
  };
  write_split(corpus.train, "train.conll");
  write_split(corpus.dev, "dev.conll");
  write_split(corpus.test, "test.conll");

  std::ofstream cfg(dir / "config.yaml");
  cfg << "# Scaled-down toy run: two artificial languages, 50-dim tables.\n"
      << "version: 1\n"
      << "seed: " << seed << "\n"
      << "output_dir: run\n"
      << "data:\n  train: train.conll\n  dev: dev.conll\n  test: test.conll\n"
      << "embeddings:\n";
  for (const auto& lang : corpus.languages) {
    const std::string w = "emb/word." + lang.id + ".vec";
    const std::string s = "emb/sub." + lang.id + ".vec";
    const std::string b = "emb/bpe." + lang.id + ".txt";
    embedding::save_text_embeddings(lang.word, dir / w, embedding::TextFormat::vec_with_header);
    embedding::save_text_embeddings(lang.subword, dir / s, embedding::TextFormat::vec_with_header);
    std::ofstream merges(dir / b);
    merges << "#version: toy\n";
    for (const auto& [l, r] : lang.merges) merges << l << ' ' << r << '\n';
    cfg << "  - {level: word, language: " << lang.id << ", path: " << w
        << ", format: vec_with_header, dim: " << lang.word.dim() << "}\n"
        << "  - {level: subword, language: " << lang.id << ", path: " << s
        << ", format: vec_with_header, dim: " << lang.subword.dim() << ", bpe_merges: " << b << "}\n";
  }
  cfg << "model:\n"
      << "  variant: hme\n"
      << "  meta_dim: 32\n"
      << "  d_model: 64\n"
      << "  layers: 2\n"
      << "  heads: 4\n"
      << "  ff_dim: 256\n"
      << "  dropout: 0.1\n"
      << "  subword: {layers: 1, heads: 2}\n"
      << "  char: {dim: 16, layers: 1, heads: 2}\n"
      << "train:\n"
      << "  learning_rate: 0.001\n"
      << "  batch_size: 32\n"
      << "  max_epochs: 30\n"
      << "  patience: 5\n"
      << "  clip_norm: 5.0\n";
  if (!cfg) throw InputError((dir / "config.yaml").string() + ": write failed");
}

}  // namespace hme::synth
