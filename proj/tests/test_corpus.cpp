#include <fstream>
#include <sstream>

#include "doctest.h"
#include "seqaug/corpus.hpp"
#include "test_util.hpp"

using namespace seqaug;
using testutil::TempDir;

TEST_CASE("tokenize detaches punctuation") {
  CHECK(tokenize("").tokens.empty());
  CHECK(tokenize("He said hi.").tokens == std::vector<std::string>{"He", "said", "hi", "."});
  CHECK(tokenize("a  b").tokens == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("(\"ok,\" she said!)").tokens ==
        std::vector<std::string>{"(", "\"", "ok", ",", "\"", "she", "said", "!", ")"});
  CHECK(tokenize("don't e.g. 3.5").tokens == std::vector<std::string>{"don't", "e.g", ".", "3.5"});
  CHECK(tokenize("Hi.").raw == "Hi.");
}

TEST_CASE("tokenize is idempotent on its own output") {
  std::mt19937_64 rng(3);
  const std::string alphabet = "ab .,!?;:\"()'-";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 30);
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    for (std::size_t i = len(rng); i > 0; --i) s += alphabet[pick(rng)];
    auto once = tokenize(s);
    CHECK(tokenize(once.joined()).tokens == once.tokens);
  }
}

TEST_CASE("origin tags") {
  CHECK(Origin::parse("gold") == Origin::gold());
  CHECK(Origin::parse("augmented:bt").str() == "augmented:bt");
  CHECK(Origin::parse("task:gec") == Origin::task("gec"));
  CHECK_THROWS_AS(Origin::parse("silver"), DataError);
}

namespace {

Corpus random_corpus(std::mt19937_64& rng, std::size_t n) {
  Corpus c;
  const std::vector<std::string> words{"a", "b", "x\\y", "tab\there", "c.", "\"q\""};
  std::uniform_int_distribution<std::size_t> w(0, words.size() - 1), len(1, 6), kind(0, 2);
  std::uniform_real_distribution<double> weight(0.0, 3.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::string s, t;
    for (std::size_t k = len(rng); k > 0; --k) s += (s.empty() ? "" : " ") + words[w(rng)];
    for (std::size_t k = len(rng); k > 0; --k) t += (t.empty() ? "" : " ") + words[w(rng)];
    Origin o = kind(rng) == 0 ? Origin::gold()
               : kind(rng) == 1 ? Origin::augmented("bt")
                                : Origin::task("gec");
    c.pairs.push_back(make_pair(s, t, o, weight(rng)));
  }
  return c;
}

}  // namespace

TEST_CASE("corpus read/write round trip in both formats") {
  std::mt19937_64 rng(11);
  TempDir dir;
  for (int trial = 0; trial < 20; ++trial) {
    Corpus c = random_corpus(rng, 30);
    for (auto fmt : {CorpusFormat::tsv, CorpusFormat::jsonl}) {
      std::stringstream ss;
      write_corpus(c, ss, fmt);
      Corpus back = read_corpus(ss, fmt);
      REQUIRE(back.size() == c.size());
      for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(back.pairs[i].source.tokens == c.pairs[i].source.tokens);
        CHECK(back.pairs[i].target.tokens == c.pairs[i].target.tokens);
        CHECK(back.pairs[i].origin == c.pairs[i].origin);
        CHECK(back.pairs[i].weight == c.pairs[i].weight);
      }
    }
  }
  Corpus c = random_corpus(rng, 5);
  write_corpus(c, dir / "c.jsonl");
  write_corpus(c, dir / "c.tsv");
  CHECK(canonical_text(read_corpus(dir / "c.jsonl")) == canonical_text(c));
  CHECK(canonical_text(read_corpus(dir / "c.tsv")) == canonical_text(c));
}

TEST_CASE("corpus parse errors name the line and field") {
  std::stringstream tsv("a\tb\nonly-one-field\n");
  try {
    read_corpus(tsv, CorpusFormat::tsv);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::stringstream js("{\"source\": \"a\"}\n");
  try {
    read_corpus(js, CorpusFormat::jsonl);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 1: missing field 'target'") != std::string::npos);
  }
  std::stringstream bad_w("a\tb\tgold\t-1\n");
  CHECK_THROWS_AS(read_corpus(bad_w, CorpusFormat::tsv), DataError);
  CHECK_THROWS_AS(read_corpus(std::filesystem::path("/nonexistent/x.tsv")), DataError);
}

TEST_CASE("sentence files") {
  std::stringstream in("Hello, world.\n\nsecond line\n");
  auto s = read_sentences(in);
  REQUIRE(s.size() == 3);
  CHECK(s[0].tokens == std::vector<std::string>{"Hello", ",", "world", "."});
  CHECK(s[1].empty());
  std::stringstream out;
  write_sentences(s, out);
  CHECK(out.str() == "Hello , world .\n\nsecond line\n");
}
