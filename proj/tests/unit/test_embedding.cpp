#include "doctest.h"

#include "hme/autodiff/ops.hpp"
#include "hme/embedding/manifest.hpp"
#include "hme/embedding/table.hpp"
#include "hme/util/error.hpp"
#include "hme/util/random.hpp"
#include "support/temp_dir.hpp"

using namespace hme;
using namespace hme::embedding;

namespace {

EmbeddingTable::Meta frozen(const std::string& lang = "en") { return {lang, Level::word, false, OovPolicy::zero_vector}; }

std::vector<double> row(const ad::Tensor& t) { return t.values(); }

}  // namespace

TEST_CASE("text table loading") {
  testing::TempDir dir;
  const auto t = load_text_embeddings(dir.write("a.vec", "2 3\na 1 2 3\nb 4 5 6"),
                                      TextFormat::vec_with_header, frozen());
  CHECK(t.dim() == 3);
  CHECK(t.vocab_size() == 2);
  CHECK(t.find("a") == 0);
  CHECK(t.find("b") == 1);
  CHECK(row(t.lookup("b")) == std::vector<double>{4, 5, 6});

  const auto g = load_text_embeddings(dir.write("g.txt", "x 0.5 -0.5"),
                                      TextFormat::glove_no_header, frozen());
  CHECK(g.dim() == 2);
  CHECK(row(g.lookup("x")) == std::vector<double>{0.5, -0.5});

  const auto crlf = load_text_embeddings(dir.write("c.vec", "2 1\r\na 1\r\na 2\r\n"),
                                         TextFormat::vec_with_header, frozen());
  CHECK(crlf.vocab_size() == 1);
  CHECK(row(crlf.lookup("a")) == std::vector<double>{1});

  const auto limited = load_text_embeddings(dir.write("l.vec", "3 1\na 1\nb 2\nc 3\n"),
                                            TextFormat::vec_with_header, frozen(), 0, 2);
  CHECK(limited.vocab_size() == 2);
}

TEST_CASE("text table errors name the line") {
  testing::TempDir dir;
  auto message = [](auto&& fn) {
    try {
      fn();
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const auto p = dir.write("bad.vec", "1 3\na 1 2\n");
  const auto m = message([&] { load_text_embeddings(p, TextFormat::vec_with_header, frozen()); });
  CHECK(m.find(":2") != std::string::npos);
  CHECK(m.find("bad.vec") != std::string::npos);
  CHECK(message([&] {
          load_text_embeddings(dir.write("e.vec", ""), TextFormat::vec_with_header, frozen());
        }) != "no error");
  CHECK(message([&] {
          load_text_embeddings(dir.write("x.txt", "a 1 zz\n"), TextFormat::glove_no_header, frozen());
        }).find(":1") != std::string::npos);
  CHECK(message([&] {
          load_text_embeddings(dir.write("d.txt", "a 1 2\n"), TextFormat::glove_no_header, frozen(), 3);
        }) != "no error");
  CHECK(message([&] {
          load_text_embeddings(dir / "missing.vec", TextFormat::vec_with_header, frozen());
        }).find("missing.vec") != std::string::npos);
}

TEST_CASE("lookup fallback and OOV") {
  const auto t = EmbeddingTable::create(frozen(), 2, {"walking", "x"}, {1, 2, 3, 4});
  CHECK(row(t.lookup("walking")) == std::vector<double>{1, 2});
  CHECK(row(t.lookup("Walking")) == std::vector<double>{1, 2});
  CHECK(row(t.lookup("nope")) == std::vector<double>{0, 0});
  CHECK(t.row_for("nope") == EmbeddingTable::npos);
  const auto unk = EmbeddingTable::create({"c", Level::character, true, OovPolicy::trainable_unk},
                                          2, {"a"}, {1, 1}, std::vector<double>{7, 8});
  CHECK(row(unk.lookup("zz")) == std::vector<double>{7, 8});
  CHECK(unk.row_for("zz") == unk.unk_row());
}

TEST_CASE("save/load round trip is exact") {
  testing::TempDir dir;
  Rng rng(3);
  std::vector<std::string> toks{"a", "b\xC3\xB1", "<USR>", "z"};
  std::vector<double> vals(toks.size() * 5);
  for (double& v : vals) v = rng.uniform(-3, 3) * 1e-3;
  const auto t = EmbeddingTable::create(frozen(), 5, toks, vals);
  for (auto fmt : {TextFormat::vec_with_header, TextFormat::glove_no_header}) {
    const auto p = dir / std::string(format_name(fmt));
    save_text_embeddings(t, p, fmt);
    const auto back = load_text_embeddings(p, fmt, frozen());
    CHECK(back.tokens() == toks);
    CHECK(back.vectors().values() == vals);
    CHECK(back.content_hash() == t.content_hash());
  }
}

TEST_CASE("char table initialisation") {
  const std::set<std::string> alpha{"a", "b", "\xC3\xB1"};
  const auto a = init_char_table(alpha, 4, 1);
  const auto b = init_char_table(alpha, 4, 1);
  const auto c = init_char_table(alpha, 4, 2);
  CHECK(a.vectors().values() == b.vectors().values());
  CHECK(a.vectors().values() != c.vectors().values());
  CHECK(a.trainable());
  CHECK(a.find(std::string(kPadSymbol)) == 0);
  CHECK(row(a.lookup(kPadSymbol)) == std::vector<double>(4, 0.0));
  CHECK(a.vectors().rows() == alpha.size() + 2);
  for (double v : a.vectors().data()) CHECK(std::abs(v) <= 0.1);
  CHECK_THROWS(init_char_table({}, 4, 1));
}

TEST_CASE("random baseline table is seeded and trainable") {
  const std::set<std::string> vocab{"x", "y"};
  const auto a = random_table(vocab, 3, 11), b = random_table(vocab, 3, 11), c = random_table(vocab, 3, 12);
  CHECK(a.trainable());
  CHECK(a.vectors().values() == b.vectors().values());
  CHECK(a.vectors().values() != c.vectors().values());
}

TEST_CASE("frozen gather produces no table gradient") {
  const auto t = EmbeddingTable::create(frozen(), 2, {"a", "b"}, {1, 2, 3, 4});
  const std::vector<std::string> toks{"b", "a", "zz"};
  auto m = t.lookup_rows(toks);
  CHECK(m.values() == std::vector<double>{3, 4, 1, 2, 0, 0});
  CHECK_FALSE(m.requires_grad());
  CHECK_FALSE(t.vectors().requires_grad());

  auto ch = init_char_table({"a", "b"}, 2, 5);
  const std::vector<std::string> cs{"a", "a", "q"};
  auto loss = ad::sum(ch.lookup_rows(cs));
  ad::backward(loss);
  const auto g = ch.vectors().grad();
  CHECK(g[ch.find("a") * 2] == 2.0);
  CHECK(g[ch.unk_row() * 2] == 1.0);
  CHECK(g[0] == 0.0);
  ad::Tape::current().clear();
}

TEST_CASE("extra rows for special tokens") {
  const auto t = EmbeddingTable::create(frozen(), 2, {"a"}, {1, 2});
  const std::vector<std::string> extra{"<USR>", "a"};
  const auto e = with_extra_rows(t, extra, 4);
  CHECK(e.vocab_size() == 2);
  CHECK(row(e.lookup("a")) == std::vector<double>{1, 2});
  CHECK_FALSE(e.trainable());
  CHECK(row(e.lookup("<USR>")) == row(with_extra_rows(t, extra, 4).lookup("<USR>")));
}

TEST_CASE("manifest store loading") {
  testing::TempDir dir;
  EmbeddingManifest m;
  m.entries.push_back({Level::word, "en", dir.write("en.vec", "1 2\na 1 2\n"), TextFormat::vec_with_header, 2, {}, {}});
  m.entries.push_back({Level::word, "es", dir.write("es.txt", "b 1 2 3\n"), TextFormat::glove_no_header, 3, {}, {}});
  m.entries.push_back({Level::subword, "en", dir.write("en.sub", "1 2\nlo 1 2\n"), TextFormat::vec_with_header, 2, {}, {}});
  const auto store = load_store(m);
  REQUIRE(store.word.size() == 2);
  CHECK(store.word[1].language() == "es");
  CHECK(store.word[1].dim() == 3);
  CHECK(store.subword.size() == 1);
  m.entries[1].dim = 4;
  CHECK_THROWS_AS(load_store(m), InputError);
}
