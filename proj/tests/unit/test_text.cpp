#include "doctest.h"

#include <sstream>

#include "hme/text/bpe.hpp"
#include "hme/text/preprocess.hpp"
#include "hme/text/sentence.hpp"
#include "hme/util/error.hpp"
#include "hme/util/random.hpp"
#include "support/temp_dir.hpp"

using namespace hme;
using namespace hme::text;

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += p;
  return out;
}

const BpeModel kLowest("en", {{"l", "o"}, {"lo", "w"}, {"e", "s"}, {"es", "t</w>"}});

}  // namespace

TEST_CASE("preprocess rules") {
  CHECK(preprocess_token("@john") == "<USR>");
  CHECK(preprocess_token("#tbt") == "<USR>");
  CHECK(preprocess_token("https://t.co/x") == "<URL>");
  CHECK(preprocess_token("http://a.b") == "<URL>");
  CHECK(preprocess_token("WWW.example.com") == "<URL>");
  CHECK(preprocess_token("hola") == "hola");
  CHECK(preprocess_token("\xF0\x9F\x98\x82") == "<EMOJI>");
  CHECK(preprocess_token("\xF0\x9F\x98\x82\xF0\x9F\x91\x8D") == "<EMOJI>");
  CHECK(preprocess_token("ok\xF0\x9F\x98\x82") == "ok\xF0\x9F\x98\x82");
  CHECK(preprocess_token("a@b") == "a@b");
  for (const char* t : {"@x", "#y", "www.z", "plain", "\xE2\x9D\xA4", "<USR>", "<URL>", "<EMOJI>"}) {
    const auto once = preprocess_token(t);
    CHECK(preprocess_token(once) == once);
  }
  PreprocessOptions none;
  none.emoji_ranges.clear();
  CHECK(preprocess_token("\xF0\x9F\x98\x82", none) == "\xF0\x9F\x98\x82");
}

TEST_CASE("character decomposition") {
  CHECK(to_chars("ab") == std::vector<std::string>{"a", "b"});
  CHECK(to_chars("a\xC3\xB1o") == std::vector<std::string>{"a", "\xC3\xB1", "o"});
  CHECK(to_chars("<USR>") == std::vector<std::string>{"<USR>"});
}

TEST_CASE("BPE fixtures") {
  CHECK(segment(BpeModel("x", {}), "abc") == std::vector<std::string>{"a", "b", "c"});
  CHECK(segment(kLowest, "lowest") == std::vector<std::string>{"low", "est"});
  const auto pieces = apply_bpe(kLowest, "lowest");
  REQUIRE(pieces.size() == 2);
  CHECK_FALSE(pieces[0].word_end);
  CHECK(pieces[1].word_end);
  // "est" only merges with the end marker, so mid-word it stays split.
  CHECK(segment(kLowest, "estx") == std::vector<std::string>{"es", "t", "x"});
  CHECK(segment(kLowest, "<URL>") == std::vector<std::string>{"<URL>"});
}

TEST_CASE("BPE ties merge the leftmost pair") {
  const BpeModel m("x", {{"a", "a"}});
  CHECK(segment(m, "aaa") == std::vector<std::string>{"aa", "a"});
  CHECK(segment(m, "aaaa") == std::vector<std::string>{"aa", "a", "a"});
  CHECK(segment(BpeModel("x", {{"a", "a"}, {"a", "a</w>"}}), "aaaa") == std::vector<std::string>{"aa", "aa"});
}

TEST_CASE("BPE reconstruction and re-segmentation on random words") {
  Rng rng(5);
  const std::vector<std::string> alphabet{"a", "b", "c", "\xC3\xB1", "\xCE\xB2"};
  std::vector<std::pair<std::string, std::string>> merges;
  for (int k = 0; k < 30; ++k) {
    std::string l = alphabet[rng.below(alphabet.size())];
    std::string r = alphabet[rng.below(alphabet.size())];
    if (rng.below(3) == 0) l += alphabet[rng.below(alphabet.size())];
    if (rng.below(4) == 0) r += "</w>";
    merges.emplace_back(l, r);
  }
  const BpeModel model("r", merges);
  for (int trial = 0; trial < 500; ++trial) {
    std::string word;
    const auto len = 1 + rng.below(9);
    for (std::size_t i = 0; i < len; ++i) word += alphabet[rng.below(alphabet.size())];
    const auto seg = segment(model, word);
    CHECK(join(seg) == word);
    CHECK(segment(model, join(seg)) == seg);
  }
}

TEST_CASE("merge file loading") {
  testing::TempDir dir;
  const auto p = dir.write("m.txt", "#version: 0.2\nl o\nlo w\ne s\nes t</w>\n");
  const auto m = BpeModel::load(p, "en");
  CHECK(m.merge_count() == 4);
  CHECK(m.rank("lo", "w") == 1);
  CHECK(m.rank("x", "y") == BpeModel::npos);
  CHECK(segment(m, "lowest") == std::vector<std::string>{"low", "est"});
  CHECK_THROWS_AS(BpeModel::load(dir.write("bad.txt", "a b c\n"), "en"), InputError);
}

TEST_CASE("CoNLL reading") {
  {
    std::istringstream in("walking\tB-other\ndead\tI-other\n\n");
    const auto data = read_conll(in);
    REQUIRE(data.sentences.size() == 1);
    CHECK(data.sentences[0].words == std::vector<std::string>{"walking", "dead"});
    CHECK(data.sentences[0].labels == std::vector<std::string>{"B-other", "I-other"});
  }
  {
    std::istringstream in("a\tO\n\nb\tO\nc\tB-per\n");
    CHECK(read_conll(in).sentences.size() == 2);
  }
  {
    std::istringstream in("x\tI-per\ny\tO\n");
    const auto data = read_conll(in);
    CHECK(data.sentences[0].labels[0] == "B-per");
    CHECK(data.repairs == 1);
  }
  {
    std::istringstream in("@me\tO\r\nhttp://x\tO\r\n");
    const auto data = read_conll(in);
    CHECK(data.sentences[0].raw_tokens == std::vector<std::string>{"@me", "http://x"});
    CHECK(data.sentences[0].words == std::vector<std::string>{"<USR>", "<URL>"});
  }
  std::istringstream malformed("a\tO\nb\n");
  CHECK_THROWS_AS(read_conll(malformed), InputError);
  ConllOptions vocab;
  vocab.label_vocabulary = std::set<std::string>{"O", "B-per", "I-per"};
  std::istringstream unknown("a\tB-loc\n");
  CHECK_THROWS_AS(read_conll(unknown, vocab), InputError);
  std::istringstream bad_tag("a\tX-per\n");
  CHECK_THROWS_AS(read_conll(bad_tag), InputError);
}

TEST_CASE("IOB repair") {
  std::vector<std::string> tags{"I-a", "I-a", "O", "I-b", "B-a", "I-b"};
  CHECK(repair_iob(tags) == 3);
  CHECK(tags == std::vector<std::string>{"B-a", "I-a", "O", "B-b", "B-a", "B-b"});
}

TEST_CASE("CoNLL write/read round trip") {
  Rng rng(9);
  const std::vector<std::string> vocab{"hola", "@ana", "casa", "NYC", "\xF0\x9F\x98\x82", "de"};
  const std::vector<std::string> tags{"O", "B-per", "I-per", "B-loc", "I-loc"};
  std::vector<TokenizedSentence> sentences;
  for (int s = 0; s < 20; ++s) {
    std::vector<std::string> toks, labels;
    const auto n = 1 + rng.below(7);
    for (std::size_t i = 0; i < n; ++i) {
      toks.push_back(vocab[rng.below(vocab.size())]);
      labels.push_back(tags[rng.below(tags.size())]);
    }
    repair_iob(labels);
    sentences.push_back(make_sentence(toks, labels));
  }
  std::stringstream buf;
  write_conll(buf, sentences);
  const auto back = read_conll(buf);
  REQUIRE(back.sentences.size() == sentences.size());
  CHECK(back.repairs == 0);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    CHECK(back.sentences[s].raw_tokens == sentences[s].raw_tokens);
    CHECK(back.sentences[s].words == sentences[s].words);
    CHECK(back.sentences[s].labels == sentences[s].labels);
    CHECK(back.sentences[s].chars == sentences[s].chars);
  }
}

TEST_CASE("sentence segmentation covers every language") {
  auto s = make_sentence({"lowest", "@x"});
  segment_sentence(s, {kLowest, BpeModel("es", {})});
  REQUIRE(s.subwords.size() == 2);
  CHECK(s.subwords[0][0] == std::vector<std::string>{"low", "est"});
  CHECK(s.subwords[1][0].size() == 6);
  CHECK(s.subwords[1][1] == std::vector<std::string>{"<USR>"});
  CHECK(s.chars[1] == std::vector<std::string>{"<USR>"});
}
