#include "hme/model/tagger.hpp"

#include "hme/text/preprocess.hpp"
#include "hme/util/error.hpp"
#include "hme/util/hash.hpp"
#include "hme/util/random.hpp"

namespace hme::model {

namespace {

constexpr std::string_view kVariantNames[] = {"hme", "mme_word", "concat", "linear", "random"};

TransformerConfig inner_encoder(std::size_t dim, std::size_t layers, std::size_t heads,
                                double dropout) {
  TransformerConfig c;
  c.input_dim = dim;
  c.d_model = dim;
  c.layers = layers;
  c.heads = heads;
  c.ff_dim = 4 * dim;
  c.dropout = dropout;
  c.input_projection = false;
  return c;
}

}  // namespace

std::string_view variant_name(Variant v) { return kVariantNames[static_cast<int>(v)]; }

Variant parse_variant(std::string_view name) {
  for (int i = 0; i < 5; ++i)
    if (kVariantNames[i] == name) return static_cast<Variant>(i);
  throw InputError("unknown encoder variant '" + std::string(name) +
                   "' (expected hme, mme_word, concat, linear or random)");
}

void ModelConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw InputError("model: " + what);
  };
  need(meta_dim > 0, "meta_dim must be positive");
  need(d_model > 0, "d_model must be positive");
  need(heads > 0 && d_model % heads == 0, "d_model must be divisible by heads");
  need(ff_dim > 0, "ff_dim must be positive");
  need(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  if (subword_enabled() && subword_layers > 0)
    need(subword_heads > 0 && meta_dim % subword_heads == 0,
         "meta_dim must be divisible by subword_heads");
  if (char_enabled()) {
    need(char_dim > 0, "char_dim must be positive");
    if (char_layers > 0)
      need(char_heads > 0 && meta_dim % char_heads == 0, "meta_dim must be divisible by char_heads");
  }
  if (variant == Variant::random) need(random_dim > 0, "random_dim must be positive");
}

TaggerResources load_resources(const embedding::EmbeddingManifest& manifest) {
  auto store = embedding::load_store(manifest);
  TaggerResources res;
  res.word = std::move(store.word);
  const auto specials = text::special_tokens();
  const auto sub_entries = manifest.at_level(embedding::Level::subword);
  for (std::size_t j = 0; j < sub_entries.size(); ++j) {
    const auto& e = sub_entries[j];
    if (e.bpe_merges.empty())
      throw InputError("subword embeddings for '" + e.language + "' need a bpe merges file");
    res.bpe.push_back(text::BpeModel::load(e.bpe_merges, e.language));
    res.subword.push_back(embedding::with_extra_rows(store.subword[j], specials,
                                                     hash_string("special:" + e.language)));
  }
  return res;
}

Tagger::Tagger(ModelConfig config, LabelSet labels, TaggerResources resources,
               const std::set<std::string>& char_alphabet,
               const std::set<std::string>& random_vocab, std::uint64_t seed)
    : config_(config), labels_(std::move(labels)), resources_(std::move(resources)), seed_(seed) {
  config_.validate();
  if (labels_.size() == 0) throw InputError("model: empty label set");
  std::size_t feature_dim = 0;
  std::vector<std::size_t> word_dims;
  for (const auto& t : resources_.word) word_dims.push_back(t.dim());
  switch (config_.variant) {
    case Variant::hme:
    case Variant::mme_word:
    case Variant::linear:
      if (word_dims.empty()) throw InputError("model: variant needs at least one word embedding table");
      word_proj_ = ProjectionSet::create(word_dims, config_.meta_dim, seed, "word.proj");
      if (config_.variant != Variant::linear)
        word_scorer_ = AttentionScorer::create(config_.meta_dim, seed, "word.score");
      feature_dim = config_.meta_dim;
      break;
    case Variant::concat:
      if (word_dims.empty()) throw InputError("model: concat needs at least one word embedding table");
      for (auto d : word_dims) feature_dim += d;
      break;
    case Variant::random:
      if (random_vocab.empty()) throw InputError("model: random baseline needs a vocabulary");
      random_table_ = embedding::random_table(random_vocab, config_.random_dim,
                                              hash_key(seed, hash_string("random.table")));
      feature_dim = config_.random_dim;
      break;
  }
  if (config_.subword_enabled()) {
    if (resources_.subword.empty())
      throw InputError("model: subword level enabled but no subword embedding tables given");
    std::vector<std::size_t> dims;
    for (const auto& t : resources_.subword) dims.push_back(t.dim());
    subword_proj_ = ProjectionSet::create(dims, config_.meta_dim, seed, "subword.proj");
    subword_encoder_ = TransformerEncoder(
        inner_encoder(config_.meta_dim, config_.subword_layers, config_.subword_heads, config_.dropout),
        seed, "subword.encoder");
    subword_scorer_ = AttentionScorer::create(config_.meta_dim, seed, "subword.score");
    feature_dim += config_.meta_dim;
  }
  if (config_.char_enabled()) {
    std::set<std::string> alphabet = char_alphabet;
    for (const auto& s : text::special_tokens()) alphabet.insert(s);
    char_table_ = embedding::init_char_table(alphabet, config_.char_dim,
                                             hash_key(seed, hash_string("char.table")));
    char_proj_ = Linear::create(config_.char_dim, config_.meta_dim, seed, "char.proj");
    char_encoder_ = TransformerEncoder(
        inner_encoder(config_.meta_dim, config_.char_layers, config_.char_heads, config_.dropout),
        seed, "char.encoder");
    feature_dim += config_.meta_dim;
  }
  TransformerConfig enc;
  enc.input_dim = feature_dim;
  enc.d_model = config_.d_model;
  enc.layers = config_.layers;
  enc.heads = config_.heads;
  enc.ff_dim = config_.ff_dim;
  enc.dropout = config_.dropout;
  encoder_ = TransformerEncoder(enc, seed, "encoder");
  emission_ = Linear::create(config_.d_model, labels_.size(), seed, "emission");
  crf_ = CrfParams::create(TransitionMask::iob(labels_));
}

Features Tagger::featurize(const text::TokenizedSentence& sentence) const {
  Features f;
  f.n = sentence.size();
  if (f.n == 0) throw InputError("cannot featurize an empty sentence");
  const auto& words = sentence.words;
  if (config_.word_tables_used()) {
    for (const auto& t : resources_.word) f.word.push_back(t.lookup_rows(words));
    for (const auto& w : words) {
      bool found = false;
      for (const auto& t : resources_.word) found = found || t.find(w) != embedding::EmbeddingTable::npos;
      if (!found) ++f.oov_words;
    }
  }
  if (config_.subword_enabled()) {
    for (std::size_t j = 0; j < resources_.subword.size(); ++j) {
      std::vector<std::string> pieces;
      std::vector<std::size_t> offsets{0};
      for (const auto& w : words) {
        for (auto& p : text::segment(resources_.bpe[j], w)) pieces.push_back(std::move(p));
        offsets.push_back(pieces.size());
      }
      f.subword.push_back({resources_.subword[j].lookup_rows(pieces), std::move(offsets)});
    }
  }
  if (char_table_) {
    f.char_offsets.push_back(0);
    for (std::size_t i = 0; i < f.n; ++i) {
      const auto chars = i < sentence.chars.size() ? sentence.chars[i] : text::to_chars(words[i]);
      for (const auto& c : chars) f.char_rows.push_back(char_table_->row_for(c));
      f.char_offsets.push_back(f.char_rows.size());
    }
  }
  if (random_table_)
    for (const auto& w : words) f.random_rows.push_back(random_table_->row_for(w));
  if (sentence.tagged()) f.gold = labels_.encode(sentence.labels);
  return f;
}

ad::Tensor Tagger::represent(const Features& f, ForwardMode& mode, TaggerOutput& out) const {
  switch (config_.variant) {
    case Variant::concat:
      return concat_baseline(f.word);
    case Variant::linear:
      return linear_baseline(f.word, word_proj_);
    case Variant::random:
      return random_table_->gather(f.random_rows);
    case Variant::mme_word:
    case Variant::hme:
      break;
  }
  const MmeResult word = mme_word(f.word, word_proj_, word_scorer_);
  out.alpha_word = word.alpha;
  ad::Tensor u_sub, u_char;
  if (config_.subword_enabled()) {
    const MmeResult sub = mme_subword(f.subword, subword_proj_, subword_encoder_, subword_scorer_, mode);
    out.alpha_subword = sub.alpha;
    u_sub = sub.u;
  }
  if (char_table_)
    u_char = char_encode({char_table_->gather(f.char_rows), f.char_offsets}, char_proj_,
                         char_encoder_, mode);
  return hme_concat(word.u, u_sub, u_char);
}

TaggerOutput Tagger::forward(const Features& features, ForwardMode& mode) const {
  TaggerOutput out;
  const ad::Tensor u = represent(features, mode, out);
  out.emissions = emission_.forward(encoder_.forward(u, {}, mode));
  return out;
}

ad::Tensor Tagger::loss(const Features& features, ForwardMode& mode) const {
  if (features.gold.size() != features.n) throw InputError("sentence has no gold tags");
  return crf_neg_log_likelihood(forward(features, mode).emissions, crf_, features.gold);
}

TaggerOutput Tagger::infer(const Features& features) const {
  ad::NoGradGuard guard;
  ForwardMode eval;
  return forward(features, eval);
}

std::vector<std::string> Tagger::predict(const Features& features) const {
  const auto out = infer(features);
  return labels_.decode(viterbi_decode(out.emissions, crf_).tags);
}

ParameterList Tagger::parameters() const {
  ParameterList out;
  if (config_.variant == Variant::hme || config_.variant == Variant::mme_word ||
      config_.variant == Variant::linear)
    word_proj_.collect(out, "word.proj");
  if (config_.variant == Variant::hme || config_.variant == Variant::mme_word)
    word_scorer_.collect(out, "word.score");
  if (random_table_) out.push_back({"random.table", random_table_->vectors()});
  if (config_.subword_enabled()) {
    subword_proj_.collect(out, "subword.proj");
    subword_encoder_.collect(out);
    subword_scorer_.collect(out, "subword.score");
  }
  if (char_table_) {
    out.push_back({"char.table", char_table_->vectors()});
    char_proj_.collect(out, "char.proj");
    char_encoder_.collect(out);
  }
  encoder_.collect(out);
  emission_.collect(out, "emission");
  crf_.collect(out, "crf");
  return out;
}

std::set<std::string> collect_alphabet(const std::vector<text::TokenizedSentence>& sentences) {
  std::set<std::string> out;
  for (const auto& s : sentences)
    for (const auto& w : s.chars) out.insert(w.begin(), w.end());
  for (const auto& t : text::special_tokens()) out.insert(t);
  return out;
}

std::set<std::string> collect_vocabulary(const std::vector<text::TokenizedSentence>& sentences) {
  std::set<std::string> out;
  for (const auto& s : sentences) out.insert(s.words.begin(), s.words.end());
  return out;
}

}  // namespace hme::model
