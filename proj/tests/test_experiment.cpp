#include "doctest.h"
#include "seqaug/experiment.hpp"

using namespace seqaug;

TEST_CASE("synthetic corpora have the intended shape") {
  StVsPtftConfig cfg;
  auto d = make_st_vs_ptft_data(cfg);
  CHECK(d.gold.size() == 200);
  CHECK(d.augmented.size() == 10000);
  CHECK(d.probes.size() == 100);
  for (const auto& p : d.gold.pairs) {
    CHECK(p.source.tokens[1] == p.target.tokens[1]);  // keep-evidence against B
    CHECK(p.source.tokens[4] != p.target.tokens[4]);  // edit A
  }
  std::size_t with_b = 0;
  for (const auto& p : d.augmented.pairs)
    with_b += p.source.tokens.size() == 6 && p.source.tokens[1] != p.target.tokens[1] ? 1 : 0;
  CHECK(with_b > 800);
  CHECK(with_b < 1200);
  cfg.gold_size = 0;
  CHECK_THROWS_AS(make_st_vs_ptft_data(cfg), std::invalid_argument);
}

TEST_CASE("pooled training learns the spurious edit, two-phase training does not") {
  auto r = run_st_vs_ptft();
  const auto& st = r.outcome(RecipeMode::ST);
  const auto& pt = r.outcome(RecipeMode::PTFT);
  CHECK(st.b_applied * 2 >= st.probes);
  CHECK(pt.b_applied == 0);
  CHECK(pt.a_applied * 100 >= pt.probes * 95);
  CHECK(pt.m2.value > st.m2.value);
  CHECK(pt.gamma == 0.1);
  CHECK(st.b_prob > 0.5);
  CHECK(pt.b_prob < 0.5);
  CHECK(r.modes.size() == 4);
}

TEST_CASE("the experiment is deterministic for a seed") {
  StVsPtftConfig cfg;
  cfg.augmented_size = 2000;
  auto a = run_st_vs_ptft(cfg), b = run_st_vs_ptft(cfg);
  CHECK(format_table(a) == format_table(b));
  CHECK(a.to_json() == b.to_json());
  cfg.seed = 2;
  auto c = make_st_vs_ptft_data(cfg);
  CHECK_FALSE(c.gold == a.gold);
}
