#include "json.hpp"
#include <sstream>

#include "doctest.h"
#include "seqaug/discriminator.hpp"
#include "test_util.hpp"

using namespace seqaug;
using testutil::pair;
using testutil::sent;

namespace {

// Random pairs over a tiny sentence pool, scored from a lookup of dyadic values so
// that exact ties and exact sigma gaps occur and compare exactly.
struct RandomCase {
  std::vector<ParallelPair> pairs;
  std::map<std::string, double> score;
};

RandomCase random_case(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  RandomCase rc;
  std::vector<std::string> pool;
  for (int i = 0; i < 12; ++i) pool.push_back("s" + std::to_string(i) + " w");
  std::uniform_int_distribution<int> eighth(0, 8);
  for (const auto& s : pool) rc.score[s] = eighth(rng) / 8.0;
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (std::size_t i = 0; i < n; ++i) rc.pairs.push_back(pair(pool[pick(rng)], pool[pick(rng)]));
  return rc;
}

}  // namespace

TEST_CASE("fluency filter agrees with brute force, ties rejected") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto rc = random_case(seed, 1000);
    SentenceScorer f = [&](const Sentence& s) { return rc.score.at(s.joined()); };
    for (unsigned threads : {1u, 4u}) {
      auto res = fluency_filter(rc.pairs, f, threads);
      REQUIRE(res.decisions.size() == rc.pairs.size());
      std::size_t kept = 0, ties = 0;
      for (std::size_t i = 0; i < rc.pairs.size(); ++i) {
        double a = rc.score.at(rc.pairs[i].source.joined());
        double b = rc.score.at(rc.pairs[i].target.joined());
        ties += a == b ? 1 : 0;
        CHECK(res.decisions[i].index == i);
        CHECK(res.decisions[i].retained == (a < b));
        CHECK(res.decisions[i].score_source == a);
        CHECK(res.decisions[i].score_target == b);
        if (a < b) {
          REQUIRE(kept < res.retained.size());
          CHECK(res.retained.pairs[kept++] == rc.pairs[i]);
        }
      }
      CHECK(kept == res.retained.size());
      CHECK(ties > 0);
    }
  }
}

TEST_CASE("formality filter agrees with brute force, exact sigma kept") {
  for (std::uint64_t seed : {4u, 5u}) {
    auto rc = random_case(seed, 1000);
    SentenceScorer p = [&](const Sentence& s) { return rc.score.at(s.joined()); };
    auto res = formality_filter(rc.pairs, p, 0.5, 3);
    std::size_t kept = 0, exact = 0;
    for (std::size_t i = 0; i < rc.pairs.size(); ++i) {
      double gain = rc.score.at(rc.pairs[i].target.joined()) - rc.score.at(rc.pairs[i].source.joined());
      exact += gain == 0.5 ? 1 : 0;
      CHECK(res.decisions[i].retained == (gain >= 0.5));
      kept += gain >= 0.5 ? 1 : 0;
    }
    CHECK(res.retained.size() == kept);
    CHECK(exact > 0);
  }
  CHECK(kDefaultSigma == 0.5);
}

TEST_CASE("fluency filter with a stub LM") {
  testutil::TableLm lm;
  lm.probs = {{"bad", 0.1}, {"good", 0.9}};
  auto res = fluency_filter(std::vector{pair("bad", "good"), pair("good", "good"), pair("good", "bad")}, lm);
  CHECK(res.retained.size() == 1);
  CHECK(res.retained.pairs[0].source.joined() == "bad");
  CHECK_FALSE(res.decisions[1].retained);  // equal fluency
}

TEST_CASE("empty sides are rejected with a reason") {
  SentenceScorer f = [](const Sentence& s) { return static_cast<double>(s.tokens.size()); };
  std::vector<ParallelPair> pairs{pair("", "a b"), pair("a", "a b")};
  auto res = fluency_filter(pairs, f);
  CHECK_FALSE(res.decisions[0].retained);
  CHECK(res.decisions[0].reason == "empty source");
  CHECK(res.decisions[1].retained);
}

TEST_CASE("n-best selection returns the first qualifying candidate") {
  std::map<std::string, double> f{{"c1", 0.7}, {"c2", 0.4}, {"c3", 0.1}, {"ok", 0.6}};
  SentenceScorer sc = [&](const Sentence& s) { return f.at(s.joined()); };
  auto got = select_from_nbest(sent("ok"), std::vector{sent("c1"), sent("c2"), sent("c3")}, sc);
  REQUIRE(got);
  CHECK(got->source.joined() == "c2");
  CHECK(got->target.joined() == "ok");
  CHECK(got->origin == Origin::augmented("bt"));
  CHECK_FALSE(select_from_nbest(sent("ok"), std::vector{sent("c1"), sent("ok")}, sc));
}

TEST_CASE("formality classifier on a separable toy problem") {
  std::vector<Sentence> formal{sent("you are welcome")}, informal{sent("u are welcome")};
  FormalityConfig cfg;
  cfg.char_orders.clear();
  auto clf = train_formality_classifier(formal, informal, cfg);
  CHECK(clf.weight("w1:you") > 0);
  CHECK(clf.weight("w1:u") < 0);
  CHECK(clf.prob(formal[0]) > 0.5);
  CHECK(clf.prob(informal[0]) < 0.5);

  auto swapped = train_formality_classifier(informal, formal, cfg);
  for (const char* s : {"you are welcome", "u are", "hello there"}) {
    CHECK(swapped.prob(sent(s)) == doctest::Approx(1.0 - clf.prob(sent(s))).epsilon(1e-6));
  }
  CHECK_THROWS_AS(train_formality_classifier({}, informal, cfg), DataError);
}

TEST_CASE("classifier probabilities stay in range and survive save/load") {
  std::vector<Sentence> formal{sent("I would like to request your assistance ."),
                               sent("Thank you for your consideration .")},
      informal{sent("gimme a hand lol"), sent("thx u rock !!")};
  auto clf = train_formality_classifier(formal, informal);
  std::stringstream ss;
  clf.save(ss);
  auto back = FormalityClassifier::load(ss);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    auto s = Sentence::from_tokens(testutil::random_tokens(rng, 8, 26));
    double p = clf.prob(s);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(back.prob(s) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(formality_prob(clf, formal[0]) > formality_prob(clf, informal[0]));
  auto f = extract_features(sent("a b"), {});
  CHECK(std::is_sorted(f.begin(), f.end()));
  CHECK(std::find(f.begin(), f.end(), "w2:a b") != f.end());
  CHECK(std::find(f.begin(), f.end(), "c3: a ") != f.end());
}

TEST_CASE("classifier filter: identical pair rejected") {
  std::vector<Sentence> formal{sent("you")}, informal{sent("u")};
  auto clf = train_formality_classifier(formal, informal);
  auto res = formality_filter(std::vector{pair("u", "u"), pair("u", "you")}, clf, 0.5);
  CHECK_FALSE(res.decisions[0].retained);
  CHECK(res.decisions[1].retained == (clf.prob(sent("you")) - clf.prob(sent("u")) >= 0.5));
}

TEST_CASE("filter report is one JSON object per decision") {
  SentenceScorer f = [](const Sentence& s) { return static_cast<double>(s.tokens.size()); };
  auto res = fluency_filter(std::vector{pair("a", "a b"), pair("a b", "a")}, f);
  std::stringstream ss;
  write_filter_report(res.decisions, ss);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.contains("retained"));
    ++n;
  }
  CHECK(n == 2);
}
