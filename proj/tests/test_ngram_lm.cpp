#include <set>
#include <sstream>

#include "doctest.h"
#include "seqaug/ngram_lm.hpp"
#include "test_util.hpp"

using namespace seqaug;
using testutil::TableLm;

namespace {

// Textbook interpolated Kneser-Ney computed straight from n-gram counts.
class KnOracle {
 public:
  KnOracle(const std::vector<Sentence>& sents, int order, double d) : order_(order), d_(d) {
    vocab_.insert("</s>");
    vocab_.insert("<unk>");
    for (const auto& s : sents) {
      std::vector<std::string> seq{"<s>"};
      for (const auto& t : s.tokens) {
        seq.push_back(t);
        vocab_.insert(t);
      }
      seq.push_back("</s>");
      for (std::size_t i = 0; i < seq.size(); ++i)
        for (int k = 1; k <= order && i + k <= seq.size(); ++k) {
          Gram g(seq.begin() + i, seq.begin() + i + k);
          if (g.size() == 1 && g[0] == "<s>") continue;
          raw_[g] += 1;
        }
    }
  }

  double prob(const std::string& w, std::vector<std::string> h) const {
    if (h.size() > static_cast<std::size_t>(order_ - 1)) h.erase(h.begin(), h.end() - (order_ - 1));
    std::string word = vocab_.count(w) ? w : "<unk>";
    for (auto& t : h)
      if (!vocab_.count(t) && t != "<s>") t = "<unk>";
    return p(word, h);
  }

 private:
  using Gram = std::vector<std::string>;

  double count(const Gram& g) const {
    const bool top = g.size() == static_cast<std::size_t>(order_);
    if (top || g.front() == "<s>") {
      auto it = raw_.find(g);
      return it == raw_.end() ? 0.0 : it->second;
    }
    // number of distinct left extensions
    std::set<std::string> left;
    for (const auto& [x, c] : raw_)
      if (x.size() == g.size() + 1 && Gram(x.begin() + 1, x.end()) == g) left.insert(x.front());
    return static_cast<double>(left.size());
  }

  double p(const std::string& w, const Gram& h) const {
    if (h.empty()) {
      double total = 0, types = 0;
      for (const auto& v : vocab_) {
        double c = count({v});
        total += c;
        types += c > 0 ? 1 : 0;
      }
      double V = static_cast<double>(vocab_.size());
      return std::max(count({w}) - d_, 0.0) / total + d_ * types / total / V;
    }
    Gram lower(h.begin() + 1, h.end());
    double den = 0, followers = 0;
    for (const auto& v : vocab_) {
      Gram g = h;
      g.push_back(v);
      double c = count(g);
      den += c;
      followers += c > 0 ? 1 : 0;
    }
    if (den == 0) return p(w, lower);
    Gram g = h;
    g.push_back(w);
    return std::max(count(g) - d_, 0.0) / den + d_ * followers / den * p(w, lower);
  }

  int order_;
  double d_;
  std::set<std::string> vocab_;  // predictable types
  std::map<Gram, double> raw_;
};

std::vector<Sentence> toy_corpus() {
  std::vector<Sentence> out;
  for (const char* s : {"the cat sat on the mat", "the dog sat", "a cat ate the fish",
                        "the cat sat", "on the mat the dog slept", "a a b", "b a", "the"})
    out.push_back(testutil::sent(s));
  return out;
}

}  // namespace

TEST_CASE("KN unigram on a a b") {
  auto m = train_lm({testutil::sent("a a b")}, 1);
  const std::vector<std::string> none;
  // total 4 events (a,a,b,</s>), 3 types, 4 predictable types
  const double floor = 0.75 * 3 / 4 / 4;
  CHECK(m.prob("a", none) == doctest::Approx(1.25 / 4 + floor).epsilon(1e-12));
  CHECK(m.prob("b", none) == doctest::Approx(0.25 / 4 + floor).epsilon(1e-12));
  CHECK(m.prob("zzz", none) == doctest::Approx(floor).epsilon(1e-12));
  double sum = 0;
  for (const auto& w : m.predictable_vocab()) sum += m.prob(w, none);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("model probabilities match a direct KN computation") {
  auto corpus = toy_corpus();
  for (int order = 1; order <= 4; ++order) {
    auto m = train_lm(corpus, order);
    KnOracle oracle(corpus, order, 0.75);
    for (const auto& ctx : m.contexts())
      for (const auto& w : m.predictable_vocab())
        CHECK(m.prob(w, ctx) == doctest::Approx(oracle.prob(w, ctx)).epsilon(1e-10));
    // unseen histories and words
    std::vector<std::string> odd{"<s>", "zebra", "cat"};
    CHECK(m.prob("sat", odd) == doctest::Approx(oracle.prob("sat", odd)).epsilon(1e-10));
    CHECK(m.prob("zebra", odd) == doctest::Approx(oracle.prob("zebra", odd)).epsilon(1e-10));
  }
}

TEST_CASE("distributions normalize for every context and order") {
  auto corpus = toy_corpus();
  for (int order = 1; order <= 5; ++order) {
    auto m = train_lm(corpus, order);
    for (const auto& ctx : m.contexts()) {
      double sum = 0;
      for (const auto& w : m.predictable_vocab()) sum += m.prob(w, ctx);
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("unseen tokens keep positive probability") {
  auto m = train_lm(toy_corpus(), 3);
  std::vector<std::string> ctx{"<s>", "the"};
  CHECK(m.prob("helicopter", ctx) > 0.0);
}

TEST_CASE("ARPA and binary round trips preserve the model") {
  auto m = train_lm(toy_corpus(), 3);
  std::stringstream arpa;
  m.save_arpa(arpa);
  CHECK(arpa.str().find("\\data\\") != std::string::npos);
  auto a = NgramModel::load_arpa(arpa);
  std::stringstream bin;
  m.save_binary(bin);
  auto b = NgramModel::load_binary(bin);
  CHECK(b == m);
  for (const auto& ctx : m.contexts())
    for (const auto& w : m.predictable_vocab()) {
      CHECK(a.log_prob(w, ctx) == doctest::Approx(m.log_prob(w, ctx)).epsilon(1e-12));
      CHECK(b.log_prob(w, ctx) == m.log_prob(w, ctx));
    }
  testutil::TempDir dir;
  save_lm(m, dir / "m.arpa");
  save_lm(m, dir / "m.bin", true);
  CHECK(load_lm(dir / "m.bin") == m);
  CHECK(load_lm(dir / "m.arpa").order() == 3);
  std::stringstream junk("hello\n");
  CHECK_THROWS_AS(NgramModel::load_arpa(junk), DataError);
}

TEST_CASE("entropy and fluency on stub models") {
  TableLm lm;
  lm.probs = {{"x", 0.5}, {"y", 0.25}, {"</s>", 1.0}};
  double h = entropy(lm, testutil::sent("x y"));
  CHECK(h == doctest::Approx((std::log(2.0) + std::log(4.0)) / 3).epsilon(1e-12));
  CHECK(h == doctest::Approx(0.6931).epsilon(1e-4));

  TableLm certain;
  CHECK(entropy(certain, testutil::sent("a b c")) == 0.0);
  CHECK(fluency(certain, testutil::sent("a b c")) == 1.0);
  CHECK(fluency_from_entropy(0.0) == 1.0);
  CHECK(std::abs(fluency_from_entropy(1.0397) - 1.0 / 2.0397) < 1e-15);
  CHECK(fluency_from_entropy(1.0) > fluency_from_entropy(2.0));
  CHECK_THROWS_AS(entropy(lm, Sentence{}), DataError);
}

TEST_CASE("entropy is nonnegative under a trained model") {
  auto m = train_lm(toy_corpus(), 3);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    auto toks = testutil::random_tokens(rng, 7, 6, 1);
    CHECK(entropy(m, Sentence::from_tokens(toks)) >= 0.0);
  }
}

TEST_CASE("training errors") {
  CHECK_THROWS_AS(train_lm({}), DataError);
  CHECK_THROWS_AS(train_lm(toy_corpus(), 0), std::invalid_argument);
  CHECK_THROWS_AS(train_lm(toy_corpus(), 3, 1.5), std::invalid_argument);
}
