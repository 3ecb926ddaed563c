#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqaug/metrics.hpp"
#include "seqaug/trainer.hpp"

namespace seqaug {

/// Synthetic corpus pair reproducing the pooled-training pathology: both gold and
/// augmented data teach edit A (uncountable noun fix), augmented data also teaches a
/// spurious edit B (plural subject -> singular) that gold data keeps unchanged.
struct StVsPtftConfig {
  std::uint64_t seed = 1;
  std::size_t gold_size = 200;
  std::size_t augmented_size = 10000;
  double b_rate = 0.1;     // share of augmented pairs carrying edit B
  std::size_t probes = 100;
  double gamma = 0.1;
  DecodeConfig decode;     // blend is overridden per mode
};

struct ModeOutcome {
  RecipeMode mode = RecipeMode::ST;
  double gamma = 1.0;
  std::size_t probes = 0;
  std::size_t a_applied = 0;
  std::size_t b_applied = 0;
  double a_prob = 0.0;  // mean rule probability of the probes' A edits
  double b_prob = 0.0;  // mean rule probability of the probes' B edits
  MetricReport m2;
};

struct StVsPtftResult {
  Corpus gold;
  Corpus augmented;
  std::vector<GoldAnnotation> probes;
  std::vector<ModeOutcome> modes;  // ST, ST_up, ST_down, PTFT

  const ModeOutcome& outcome(RecipeMode mode) const;
  nlohmann::json to_json() const;
};

struct SyntheticData {
  Corpus gold;
  Corpus augmented;
  std::vector<GoldAnnotation> probes;
};

SyntheticData make_st_vs_ptft_data(const StVsPtftConfig& config);
StVsPtftResult run_st_vs_ptft(const StVsPtftConfig& config = {});

/// Fixed-width comparison table.
std::string format_table(const StVsPtftResult& result);

}  // namespace seqaug
