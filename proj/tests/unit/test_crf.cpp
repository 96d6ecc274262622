#include "doctest.h"

#include <cmath>

#include "hme/model/crf.hpp"
#include "support/crf_oracle.hpp"
#include "support/gradcheck.hpp"

using namespace hme;
using model::CrfParams;
using model::LabelSet;
using model::TransitionMask;

namespace {

CrfParams random_crf(Rng& rng, const TransitionMask& mask) {
  CrfParams crf = CrfParams::create(mask);
  for (auto* t : {&crf.transitions, &crf.start, &crf.end})
    for (double& v : t->mutable_data()) v = rng.uniform(-1.5, 1.5);
  return crf;
}

std::vector<double> random_emissions(Rng& rng, std::size_t n, std::size_t t) {
  std::vector<double> e(n * t);
  for (double& v : e) v = rng.uniform(-2, 2);
  return e;
}

}  // namespace

TEST_CASE("label set layout and IOB mask") {
  const LabelSet labels = LabelSet::from_types({"per", "loc"});
  CHECK(labels.tags() == std::vector<std::string>{"O", "B-loc", "I-loc", "B-per", "I-per"});
  const auto mask = TransitionMask::iob(labels);
  const auto t = labels.size();
  auto at = [&](const char* a, const char* b) {
    return mask.transition[labels.index(a) * t + labels.index(b)];
  };
  CHECK(at("O", "I-per") == model::kForbidden);
  CHECK(at("B-loc", "I-per") == model::kForbidden);
  CHECK(at("I-loc", "I-per") == model::kForbidden);
  CHECK(at("B-per", "I-per") == 0.0);
  CHECK(at("I-per", "I-per") == 0.0);
  CHECK(at("I-per", "B-per") == 0.0);
  CHECK(mask.start[labels.index("I-loc")] == model::kForbidden);
  CHECK(mask.start[labels.index("B-loc")] == 0.0);
  const LabelSet nine = LabelSet::from_types({"event", "group", "loc", "org", "other", "per",
                                              "prod", "time", "title"});
  CHECK(nine.size() == 19);
}

TEST_CASE("single token log-partition is a log-sum-exp") {
  CrfParams crf = CrfParams::create(TransitionMask::open(2));
  const std::vector<double> em{0.3, -1.2};
  CHECK(model::log_partition(em, 1, crf) ==
        doctest::Approx(std::log(std::exp(0.3) + std::exp(-1.2))).epsilon(1e-15));
}

TEST_CASE("NLL with every other path masked is zero") {
  TransitionMask mask = TransitionMask::open(2);
  mask.start[1] = model::kForbidden;
  mask.transition[0 * 2 + 0] = model::kForbidden;  // only 0 -> 1 -> 0 ... survives
  mask.transition[1 * 2 + 1] = model::kForbidden;
  CrfParams crf = CrfParams::create(mask);
  const auto em = ad::Tensor::from({3, 2}, {0.1, 0.4, -0.3, 0.9, 0.2, 0.0});
  const std::vector<std::size_t> gold{0, 1, 0};
  const double nll = model::crf_neg_log_likelihood(em, crf, gold).item();
  CHECK(nll >= -1e-9);
  CHECK(std::abs(nll) <= 1e-9);
  CHECK_THROWS_AS(model::crf_neg_log_likelihood(em, crf, std::vector<std::size_t>{1, 0, 1}),
                  std::invalid_argument);
}

TEST_CASE("forward algorithm and Viterbi agree with enumeration") {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(5), t = 1 + rng.below(4);
    CrfParams crf = random_crf(rng, TransitionMask::open(t));
    const auto em = random_emissions(rng, n, t);
    const auto brute = testing::enumerate_paths(em, n, crf);
    const double log_z = model::log_partition(em, n, crf);
    CHECK(std::abs(std::exp(log_z - brute.log_z) - 1.0) <= 1e-9);
    const auto vit = model::viterbi_decode(em, n, crf);
    CHECK(vit.tags == brute.best_path);
    CHECK(vit.score == doctest::Approx(brute.best_score).epsilon(1e-12));
    CHECK(vit.score <= log_z + 1e-12);
  }
}

TEST_CASE("IOB-masked decoding only produces legal paths") {
  const LabelSet labels = LabelSet::from_types({"a", "b"});
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    CrfParams crf = random_crf(rng, TransitionMask::iob(labels));
    const auto em = random_emissions(rng, n, labels.size());
    const auto vit = model::viterbi_decode(em, n, crf);
    CHECK(model::is_allowed(vit.tags, crf.mask));
    const auto brute = testing::enumerate_paths(em, n, crf);
    CHECK(vit.tags == brute.best_path);
  }
}

TEST_CASE("Viterbi tie-breaking and degenerate sizes") {
  CrfParams one = CrfParams::create(TransitionMask::open(1));
  CHECK(model::viterbi_decode(std::vector<double>(4, 0.5), 4, one).tags ==
        std::vector<std::size_t>(4, 0));
  CrfParams flat = CrfParams::create(TransitionMask::open(3));
  CHECK(model::viterbi_decode(std::vector<double>(15, 0.0), 5, flat).tags ==
        std::vector<std::size_t>(5, 0));
}

TEST_CASE("emission shifts leave NLL and the best path unchanged") {
  Rng rng(4);
  const LabelSet labels = LabelSet::from_types({"x"});
  CrfParams crf = random_crf(rng, TransitionMask::iob(labels));
  const std::size_t n = 4, t = labels.size();
  const auto em = random_emissions(rng, n, t);
  auto shifted = em;
  const double c = 2.75;
  for (std::size_t k = 0; k < t; ++k) shifted[2 * t + k] += c;
  const std::vector<std::size_t> gold{1, 2, 0, 1};
  const double a = model::crf_neg_log_likelihood(ad::Tensor::from({n, t}, em), crf, gold).item();
  const double b = model::crf_neg_log_likelihood(ad::Tensor::from({n, t}, shifted), crf, gold).item();
  CHECK(std::abs(a - b) <= 1e-9);
  CHECK(std::abs(model::log_partition(shifted, n, crf) - model::log_partition(em, n, crf) - c) <= 1e-9);
  CHECK(model::viterbi_decode(em, n, crf).tags == model::viterbi_decode(shifted, n, crf).tags);
}

TEST_CASE("NLL gradient matches finite differences") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3, t = 4;
    CrfParams crf = random_crf(rng, TransitionMask::open(t));
    ad::Tensor em = testing::random_tensor(rng, {n, t}, true, -2, 2);
    std::vector<std::size_t> gold(n);
    for (auto& g : gold) g = rng.below(t);
    const double err = testing::max_gradient_error(
        [&] { return model::crf_neg_log_likelihood(em, crf, gold); },
        {em, crf.transitions, crf.start, crf.end});
    CHECK(err <= 1e-5);
    CHECK(model::crf_neg_log_likelihood(em, crf, gold).item() >= -1e-9);
  }
  ad::Tape::current().clear();
}
