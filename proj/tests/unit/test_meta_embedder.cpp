#include "doctest.h"

#include "hme/model/meta_embedder.hpp"
#include "hme/util/error.hpp"
#include "support/gradcheck.hpp"
#include "support/layer_oracle.hpp"
#include "support/mme_properties.hpp"
#include "support/model_fixtures.hpp"

using namespace hme;
using model::ForwardMode;
using model::ProjectionSet;
using model::SegmentedRows;

namespace {

model::TransformerConfig sub_encoder(std::size_t d, std::size_t layers) {
  model::TransformerConfig c;
  c.input_dim = d;
  c.d_model = d;
  c.layers = layers;
  c.heads = 2;
  c.ff_dim = 2 * d;
  c.dropout = 0.1;
  c.input_projection = false;
  return c;
}

std::vector<testing::Mat> oracle_project(const std::vector<ad::Tensor>& emb, const ProjectionSet& p) {
  std::vector<testing::Mat> out;
  for (std::size_t j = 0; j < emb.size(); ++j)
    out.push_back(testing::linear(testing::to_mat(emb[j]), p.per_language[j]));
  return out;
}

}  // namespace

TEST_CASE("single language is the projection") {
  Rng rng(1);
  const std::vector<std::size_t> dims{4};
  const auto proj = ProjectionSet::create(dims, 3, 1, "p");
  const auto scorer = model::AttentionScorer::create(3, 1, "s");
  const std::vector<ad::Tensor> emb{testing::random_tensor(rng, {5, 4}, false)};
  const auto r = model::mme_word(emb, proj, scorer);
  CHECK(r.u.values() == proj.per_language[0].forward(emb[0]).values());
  for (double a : r.alpha.data()) CHECK(a == 1.0);
  CHECK(model::linear_baseline(emb, proj).values() == r.u.values());
}

TEST_CASE("identical languages with a shared projection") {
  Rng rng(2);
  const std::vector<std::size_t> dims{4, 4};
  auto proj = ProjectionSet::create(dims, 3, 1, "p");
  proj.per_language[1] = proj.per_language[0];
  const auto scorer = model::AttentionScorer::create(3, 1, "s");
  const auto x = testing::random_tensor(rng, {3, 4}, false);
  const std::vector<ad::Tensor> emb{x, x};
  const auto r = model::mme_word(emb, proj, scorer);
  for (double a : r.alpha.data()) CHECK(a == 0.5);
  const auto projected = proj.per_language[0].forward(x);
  for (std::size_t i = 0; i < r.u.size(); ++i) CHECK(r.u.at(i) == doctest::Approx(projected.at(i)).epsilon(1e-15));
  // Opposite vectors cancel in the linear baseline.
  const std::vector<ad::Tensor> opposite{x, ad::scale(x, -1.0)};
  auto no_bias = proj;
  for (auto& l : no_bias.per_language) l.bias = ad::Tensor::zeros({3}, true);
  for (double v : model::linear_baseline(opposite, no_bias).values()) CHECK(std::abs(v) <= 1e-15);
}

TEST_CASE("three languages match the direct formula") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<std::size_t> dims{2 + rng.below(4), 2 + rng.below(4), 2 + rng.below(4)};
    const auto proj = ProjectionSet::create(dims, 5, trial, "p");
    const auto scorer = model::AttentionScorer::create(5, trial, "s");
    std::vector<ad::Tensor> emb;
    for (auto d : dims) emb.push_back(testing::random_tensor(rng, {4, d}, false, -2, 2));
    const auto r = model::mme_word(emb, proj, scorer);
    const auto ref = testing::weighted_sum(oracle_project(emb, proj), scorer.v);
    CHECK(testing::max_abs_diff(ref.u, r.u) <= 1e-10);
    CHECK(testing::max_abs_diff(ref.alpha, r.alpha) <= 1e-10);
  }
}

TEST_CASE("attention invariants on random configurations") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = testing::check_attention(seed);
    CHECK(c.simplex_sum <= 1e-6);
    CHECK(c.min_weight >= 0.0);
    CHECK(c.shift <= 1e-9);
    CHECK(c.hull == 0.0);
    CHECK(c.single_language == 0.0);
  }
}

TEST_CASE("linear baseline equals L times uniform attention") {
  Rng rng(4);
  const std::vector<std::size_t> dims{3, 5, 2};
  const auto proj = ProjectionSet::create(dims, 4, 2, "p");
  std::vector<ad::Tensor> emb, projected;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    emb.push_back(testing::random_tensor(rng, {6, dims[j]}, false));
    projected.push_back(proj.per_language[j].forward(emb[j]));
  }
  const auto uniform = model::attend(projected, ad::Tensor::zeros({6, 3}));
  const auto lin = model::linear_baseline(emb, proj);
  for (std::size_t i = 0; i < lin.size(); ++i) CHECK(std::abs(lin.at(i) - 3.0 * uniform.u.at(i)) <= 1e-9);
}

TEST_CASE("concat baseline and hme concatenation") {
  Rng rng(5);
  const auto a = testing::random_tensor(rng, {2, 3}, false), b = testing::random_tensor(rng, {2, 2}, false);
  const std::vector<ad::Tensor> two{a, b};
  const auto c = model::concat_baseline(two);
  CHECK(c.shape() == ad::Shape{2, 5});
  CHECK(ad::slice_cols(c, 0, 3).values() == a.values());
  CHECK(ad::slice_cols(c, 3, 5).values() == b.values());
  const std::vector<ad::Tensor> one{a};
  CHECK(model::concat_baseline(one).values() == a.values());

  const auto w = testing::random_tensor(rng, {2, 3}, false);
  const auto h = model::hme_concat(w, ad::Tensor::zeros({2, 3}), ad::Tensor::zeros({2, 3}));
  CHECK(ad::slice_cols(h, 0, 3).values() == w.values());
  for (double v : ad::slice_cols(h, 3, 9).values()) CHECK(v == 0.0);
  const auto s = testing::random_tensor(rng, {2, 3}, false), ch = testing::random_tensor(rng, {2, 3}, false);
  const auto full = model::hme_concat(w, s, ch);
  CHECK(ad::slice_cols(full, 3, 6).values() == s.values());
  CHECK(ad::slice_cols(full, 6, 9).values() == ch.values());
  CHECK_THROWS_AS(model::hme_concat(w, testing::random_tensor(rng, {3, 3}, false), {}), ShapeError);
}

TEST_CASE("hme concatenation splits gradients exactly") {
  Rng rng(6);
  auto uw = testing::random_tensor(rng, {3, 2}), us = testing::random_tensor(rng, {3, 2}),
       uc = testing::random_tensor(rng, {3, 2});
  const auto wts = testing::random_tensor(rng, {3, 6}, false);
  ad::backward(testing::weighted_sum(model::hme_concat(uw, us, uc), wts));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(uw.grad()[i * 2 + k] == wts.at(i, k));
      CHECK(us.grad()[i * 2 + k] == wts.at(i, 2 + k));
      CHECK(uc.grad()[i * 2 + k] == wts.at(i, 4 + k));
    }
  ad::Tape::current().clear();
  CHECK(testing::max_gradient_error(
            [&] { return testing::weighted_sum(model::hme_concat(uw, us, uc), wts); }, {uw, us, uc}) <= 1e-5);
}

TEST_CASE("subword meta-embedding with an identity encoder") {
  Rng rng(7);
  const std::vector<std::size_t> dims{3, 4};
  const auto proj = ProjectionSet::create(dims, 4, 1, "p");
  const model::TransformerEncoder enc(sub_encoder(4, 0), 1, "e");
  const auto scorer = model::AttentionScorer::create(4, 1, "s");
  // One subword per word: pooled vector is the projected subword.
  const std::vector<SegmentedRows> single{{testing::random_tensor(rng, {2, 3}, false), {0, 1, 2}}};
  ProjectionSet p1;
  p1.per_language.push_back(proj.per_language[0]);
  ForwardMode eval;
  const auto r = model::mme_subword(single, p1, enc, scorer, eval);
  CHECK(r.u.values() == proj.per_language[0].forward(single[0].rows).values());
  // Identical pooled vectors across languages give uniform weights.
  auto shared = proj;
  shared.per_language[1] = shared.per_language[0];
  const auto rows = testing::random_tensor(rng, {5, 3}, false);
  const std::vector<SegmentedRows> twice{{rows, {0, 2, 5}}, {rows, {0, 2, 5}}};
  const auto r2 = model::mme_subword(twice, shared, enc, scorer, eval);
  for (double a : r2.alpha.data()) CHECK(a == 0.5);
  const std::vector<SegmentedRows> empty_word{{rows, {0, 0, 5}}, {rows, {0, 2, 5}}};
  CHECK_THROWS_AS(model::mme_subword(empty_word, shared, enc, scorer, eval), ShapeError);
}

TEST_CASE("subword meta-embedding matches the layerwise oracle") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<std::size_t> dims{3, 5};
    const auto proj = ProjectionSet::create(dims, 4, trial, "p");
    const model::TransformerEncoder enc(sub_encoder(4, 1), trial, "e");
    const auto scorer = model::AttentionScorer::create(4, trial, "s");
    model::ParameterList params;
    proj.collect(params, "p");
    enc.collect(params);
    scorer.collect(params, "s");
    testing::randomize(params, rng);
    // Two words: language 0 splits them into 2 and 3 subwords, language 1 into 3 and 2.
    const std::vector<SegmentedRows> langs{{testing::random_tensor(rng, {5, 3}, false), {0, 2, 5}},
                                           {testing::random_tensor(rng, {5, 5}, false), {0, 3, 5}}};
    ForwardMode eval;
    const auto r = model::mme_subword(langs, proj, enc, scorer, eval);

    std::vector<testing::Mat> pooled;
    for (std::size_t j = 0; j < 2; ++j) {
      const auto x = testing::linear(testing::to_mat(langs[j].rows), proj.per_language[j]);
      testing::Mat words(2, 4);
      for (std::size_t w = 0; w < 2; ++w) {
        const auto mean = testing::mean_rows(
            testing::encode_sequence(testing::rows_of(x, langs[j].offsets[w], langs[j].offsets[w + 1]), enc));
        for (std::size_t c = 0; c < 4; ++c) words(w, c) = mean[c];
      }
      pooled.push_back(words);
    }
    const auto ref = testing::weighted_sum(pooled, scorer.v);
    CHECK(testing::max_abs_diff(ref.u, r.u) <= 1e-8);
    CHECK(testing::max_abs_diff(ref.alpha, r.alpha) <= 1e-8);
  }
}

TEST_CASE("character encoder") {
  Rng rng(9);
  const auto lin = model::Linear::create(3, 4, 1, "c");
  ForwardMode eval;
  const model::TransformerEncoder id(sub_encoder(4, 0), 1, "e0");
  const auto one = testing::random_tensor(rng, {1, 3}, false);
  CHECK(model::char_encode({one, {0, 1}}, lin, id, eval).values() == lin.forward(one).values());

  const model::TransformerEncoder enc(sub_encoder(4, 1), 2, "e1");
  model::ParameterList params;
  enc.collect(params);
  lin.collect(params, "c");
  testing::randomize(params, rng);
  const auto word = testing::random_tensor(rng, {3, 3}, false);
  const auto twice = ad::concat({word, word}, 0);
  const auto out = model::char_encode({twice, {0, 3, 6}}, lin, enc, eval);
  CHECK(ad::slice_rows(out, 0, 1).values() == ad::slice_rows(out, 1, 2).values());
  const auto mean = testing::mean_rows(testing::encode_sequence(testing::linear(testing::to_mat(word), lin), enc));
  for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(mean[c] - out.at(0, c)) <= 1e-8);
  CHECK_THROWS_AS(model::char_encode({twice, {0, 6, 6}}, lin, enc, eval), ShapeError);
}

TEST_CASE("composite gradients match finite differences") {
  Rng rng(10);
  for (int trial = 0; trial < 3; ++trial) {
    const std::vector<std::size_t> dims{3, 2};
    const auto proj = ProjectionSet::create(dims, 4, trial, "p");
    const auto scorer = model::AttentionScorer::create(4, trial, "s");
    const model::TransformerEncoder enc(sub_encoder(4, 1), trial, "e");
    const auto sproj = ProjectionSet::create(dims, 4, trial, "sp");
    const auto sscorer = model::AttentionScorer::create(4, trial, "ss");
    const auto clin = model::Linear::create(2, 4, trial, "c");
    const model::TransformerEncoder cenc(sub_encoder(4, 1), trial, "ce");
    model::ParameterList params;
    proj.collect(params, "p");
    scorer.collect(params, "s");
    enc.collect(params);
    sproj.collect(params, "sp");
    sscorer.collect(params, "ss");
    clin.collect(params, "c");
    cenc.collect(params);
    testing::randomize(params, rng);
    const std::vector<ad::Tensor> words{testing::random_tensor(rng, {2, 3}, false),
                                        testing::random_tensor(rng, {2, 2}, false)};
    const std::vector<SegmentedRows> subs{{testing::random_tensor(rng, {3, 3}, false), {0, 1, 3}},
                                          {testing::random_tensor(rng, {4, 2}, false), {0, 2, 4}}};
    auto chars = testing::random_tensor(rng, {5, 2});
    const auto w = testing::random_tensor(rng, {2, 12}, false);
    std::vector<ad::Tensor> wrt{chars};
    for (const auto& p : params) wrt.push_back(p.tensor);
    const double err = testing::max_gradient_error(
        [&] {
          ForwardMode eval;
          const auto uw = model::mme_word(words, proj, scorer).u;
          const auto us = model::mme_subword(subs, sproj, enc, sscorer, eval).u;
          const auto uc = model::char_encode({chars, {0, 2, 5}}, clin, cenc, eval);
          return testing::weighted_sum(model::hme_concat(uw, us, uc), w);
        },
        wrt);
    CHECK(err <= 1e-5);
  }
}

TEST_CASE("shape errors") {
  Rng rng(11);
  const std::vector<std::size_t> dims{2, 2};
  const auto proj = ProjectionSet::create(dims, 3, 1, "p");
  const auto scorer = model::AttentionScorer::create(3, 1, "s");
  const std::vector<ad::Tensor> mismatch{testing::random_tensor(rng, {2, 2}, false),
                                         testing::random_tensor(rng, {3, 2}, false)};
  CHECK_THROWS_AS(model::mme_word(mismatch, proj, scorer), ShapeError);
  CHECK_THROWS_AS(model::mme_word(std::vector<ad::Tensor>{}, proj, scorer), ShapeError);
}
