#include "hme/model/meta_embedder.hpp"

#include "hme/util/error.hpp"

namespace hme::model {

ProjectionSet ProjectionSet::create(std::span<const std::size_t> input_dims, std::size_t out_dim,
                                    std::uint64_t seed, const std::string& name) {
  if (input_dims.empty()) throw InputError(name + ": no languages to project");
  ProjectionSet set;
  for (std::size_t j = 0; j < input_dims.size(); ++j)
    set.per_language.push_back(
        Linear::create(input_dims[j], out_dim, seed, name + "." + std::to_string(j)));
  return set;
}

void ProjectionSet::collect(ParameterList& out, const std::string& name) const {
  for (std::size_t j = 0; j < per_language.size(); ++j)
    per_language[j].collect(out, name + "." + std::to_string(j));
}

AttentionScorer AttentionScorer::create(std::size_t dim, std::uint64_t seed,
                                        const std::string& name) {
  return {xavier_uniform(dim, 1, seed, name + ".v")};
}

ad::Tensor AttentionScorer::score(const ad::Tensor& projected) const {
  return ad::matmul(ad::tanh(projected), v);
}

void AttentionScorer::collect(ParameterList& out, const std::string& name) const {
  out.push_back({name + ".v", v});
}

MmeResult attend(std::span<const ad::Tensor> projected, const ad::Tensor& scores) {
  if (projected.empty()) throw ShapeError("attend: no languages");
  const std::size_t n = projected.front().rows();
  if (scores.dim() != 2 || scores.rows() != n || scores.cols() != projected.size())
    throw ShapeError("attend: scores must be [tokens, languages]");
  const ad::Tensor alpha = ad::softmax(scores, 1);
  if (projected.size() == 1) return {ad::scale_rows(projected.front(), alpha), alpha};
  ad::Tensor u;
  for (std::size_t j = 0; j < projected.size(); ++j) {
    if (projected[j].rows() != n) throw ShapeError("attend: languages differ in token count");
    const ad::Tensor term = ad::scale_rows(projected[j], ad::slice_cols(alpha, j, j + 1));
    u = u.defined() ? ad::add(u, term) : term;
  }
  return {u, alpha};
}

MmeResult combine(std::span<const ad::Tensor> projected, const AttentionScorer& scorer) {
  if (projected.empty()) throw ShapeError("combine: no languages");
  std::vector<ad::Tensor> scores;
  scores.reserve(projected.size());
  for (const auto& p : projected) scores.push_back(scorer.score(p));
  const ad::Tensor joined = scores.size() == 1 ? scores.front() : ad::concat(scores, 1);
  return attend(projected, joined);
}

namespace {

std::vector<ad::Tensor> project_all(std::span<const ad::Tensor> embeddings,
                                    const ProjectionSet& projections, const char* op) {
  if (embeddings.empty()) throw ShapeError(std::string(op) + ": empty language list");
  if (embeddings.size() != projections.languages())
    throw ShapeError(std::string(op) + ": " + std::to_string(embeddings.size()) +
                     " languages but " + std::to_string(projections.languages()) + " projections");
  const std::size_t n = embeddings.front().rows();
  std::vector<ad::Tensor> out;
  out.reserve(embeddings.size());
  for (std::size_t j = 0; j < embeddings.size(); ++j) {
    if (embeddings[j].rows() != n)
      throw ShapeError(std::string(op) + ": languages differ in token count");
    out.push_back(projections.per_language[j].forward(embeddings[j]));
  }
  return out;
}

}  // namespace

MmeResult mme_word(std::span<const ad::Tensor> embeddings, const ProjectionSet& projections,
                   const AttentionScorer& scorer) {
  return combine(project_all(embeddings, projections, "mme_word"), scorer);
}

MmeResult mme_subword(std::span<const SegmentedRows> per_language,
                      const ProjectionSet& projections, const TransformerEncoder& encoder,
                      const AttentionScorer& scorer, ForwardMode& mode) {
  if (per_language.empty()) throw ShapeError("mme_subword: empty language list");
  if (per_language.size() != projections.languages())
    throw ShapeError("mme_subword: language count differs from projections");
  const std::size_t words = per_language.front().segments();
  std::vector<ad::Tensor> projected;
  std::vector<std::size_t> offsets{0};
  for (std::size_t j = 0; j < per_language.size(); ++j) {
    const auto& lang = per_language[j];
    if (lang.segments() != words) throw ShapeError("mme_subword: languages differ in word count");
    projected.push_back(projections.per_language[j].forward(lang.rows));
    const std::size_t base = offsets.back();
    for (std::size_t g = 1; g < lang.offsets.size(); ++g) {
      if (lang.offsets[g] <= lang.offsets[g - 1]) throw ShapeError("mme_subword: empty subword list");
      offsets.push_back(base + lang.offsets[g]);
    }
  }
  const ad::Tensor stacked = projected.size() == 1 ? projected.front() : ad::concat(projected, 0);
  const ad::Tensor encoded = encoder.forward(stacked, offsets, mode);
  const ad::Tensor pooled = ad::segment_mean(encoded, offsets);
  std::vector<ad::Tensor> per_word;
  for (std::size_t j = 0; j < per_language.size(); ++j)
    per_word.push_back(per_language.size() == 1 ? pooled
                                                : ad::slice_rows(pooled, j * words, (j + 1) * words));
  return combine(per_word, scorer);
}

ad::Tensor char_encode(const SegmentedRows& char_embeddings, const Linear& projection,
                       const TransformerEncoder& encoder, ForwardMode& mode) {
  for (std::size_t g = 1; g < char_embeddings.offsets.size(); ++g)
    if (char_embeddings.offsets[g] <= char_embeddings.offsets[g - 1])
      throw ShapeError("char_encode: empty character list");
  const ad::Tensor projected = projection.forward(char_embeddings.rows);
  const ad::Tensor encoded = encoder.forward(projected, char_embeddings.offsets, mode);
  return ad::segment_mean(encoded, char_embeddings.offsets);
}

ad::Tensor hme_concat(const ad::Tensor& u_word, const ad::Tensor& u_subword,
                      const ad::Tensor& u_char) {
  std::vector<ad::Tensor> parts;
  for (const auto* t : {&u_word, &u_subword, &u_char})
    if (t->defined()) parts.push_back(*t);
  if (parts.empty()) throw ShapeError("hme_concat: nothing to concatenate");
  for (const auto& p : parts)
    if (p.rows() != parts.front().rows()) throw ShapeError("hme_concat: token counts differ");
  return parts.size() == 1 ? parts.front() : ad::concat(parts, 1);
}

ad::Tensor concat_baseline(std::span<const ad::Tensor> embeddings) {
  if (embeddings.empty()) throw ShapeError("concat_baseline: empty language list");
  for (const auto& e : embeddings)
    if (e.rows() != embeddings.front().rows())
      throw ShapeError("concat_baseline: languages differ in token count");
  return embeddings.size() == 1 ? embeddings.front() : ad::concat(embeddings, 1);
}

ad::Tensor linear_baseline(std::span<const ad::Tensor> embeddings,
                           const ProjectionSet& projections) {
  const auto projected = project_all(embeddings, projections, "linear_baseline");
  ad::Tensor u = projected.front();
  for (std::size_t j = 1; j < projected.size(); ++j) u = ad::add(u, projected[j]);
  return u;
}

}  // namespace hme::model
