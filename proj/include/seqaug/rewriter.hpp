#pragma once

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seqaug/corpus.hpp"
#include "seqaug/edits.hpp"
#include "seqaug/ngram_lm.hpp"

namespace seqaug {

enum class Phase { pretrain, finetune };

/// Weighted counts kept separately per training phase.
struct PhaseCounts {
  double pretrain = 0.0;
  double finetune = 0.0;

  double& operator[](Phase p) { return p == Phase::pretrain ? pretrain : finetune; }
  double operator[](Phase p) const { return p == Phase::pretrain ? pretrain : finetune; }
  bool operator==(const PhaseCounts&) const = default;
};

/// Source side of a rule: an n-gram (tokens joined by spaces) and an optional
/// left-context token. The context is empty for context-free rules.
struct RuleKey {
  std::string context;
  std::string source;

  auto operator<=>(const RuleKey&) const = default;
};

/// Counts for one source n-gram: how often it was kept unchanged, and how often
/// it was rewritten into each target (joined tokens; empty = deletion).
struct SourceEntry {
  PhaseCounts keep;
  std::map<std::string, PhaseCounts> edits;

  bool operator==(const SourceEntry&) const = default;
};

struct RuleOptions {
  std::size_t max_ngram = 3;
  bool left_context = false;

  bool operator==(const RuleOptions&) const = default;
};

/// Flat view of one rule.
struct EditRule {
  RuleKey key;
  std::string target;
  PhaseCounts edit;
  PhaseCounts keep;
};

class RuleTable {
 public:
  RuleTable() = default;
  explicit RuleTable(RuleOptions options) : options_(options) {}

  const RuleOptions& options() const { return options_; }
  const std::map<RuleKey, SourceEntry>& entries() const { return entries_; }
  const SourceEntry* find(const RuleKey& key) const;
  std::vector<EditRule> rules() const;

  void add_keep(const RuleKey& key, Phase phase, double weight);
  void add_edit(const RuleKey& key, const std::string& target, Phase phase, double weight);

  /// Count-wise sum. Options must agree.
  void merge(const RuleTable& other);
  /// Zeroes one phase register everywhere.
  void clear_phase(Phase phase);

  /// Key used for source span [begin, end) of `tokens` under this table's options.
  RuleKey key_for(const Tokens& tokens, std::size_t begin, std::size_t end) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static RuleTable load(std::istream& in);
  static RuleTable load(const std::filesystem::path& path);

  bool operator==(const RuleTable&) const = default;

 private:
  RuleOptions options_;
  std::map<RuleKey, SourceEntry> entries_;
};

/// Accumulates edit and keep counts for every pair into one phase register,
/// weighted by the pair weight.
void learn_rules(RuleTable& table, const Corpus& corpus, Phase phase);
RuleTable learn_rules(const Corpus& corpus, Phase phase, RuleOptions options = {});

struct BlendConfig {
  double gamma = 0.1;  // weight of the pre-training register
  double alpha = 0.1;  // add-alpha smoothing, must be > 0
};

/// (gamma*e_pre + e_ft + alpha) / (gamma*(e_pre+k_pre) + e_ft + k_ft + 2*alpha)
double rule_prob(const PhaseCounts& edit, const PhaseCounts& keep, const BlendConfig& blend);
double rule_prob(const RuleTable& table, const RuleKey& key, const std::string& target,
                 const BlendConfig& blend);

struct DecodeConfig {
  std::size_t nbest = 12;
  double lm_weight = 0.0;
  double edit_threshold = 0.5;
  BlendConfig blend;
  std::size_t beam = 64;
};

/// One rule that matches the source at [begin, end) with prob >= threshold.
struct RuleMatch {
  std::size_t begin = 0;
  std::size_t end = 0;
  Tokens target;
  double prob = 0.0;

  bool operator==(const RuleMatch&) const = default;
};

struct ScoredCandidate {
  Sentence sentence;
  double model_score = 0.0;  // sum of log rule probs and log(1-p) skip terms
  double lm_score = 0.0;     // -H(candidate), 0 when no LM is used
  double score = 0.0;        // model_score + lm_weight * lm_score
  std::vector<EditOp> edits;
};

/// All rule matches above threshold, ordered by (begin, end, target).
std::vector<RuleMatch> match_rules(const RuleTable& table, const Tokens& source,
                                   const DecodeConfig& config);

/// Length-normalized log-likelihood including the end event; defined for empty input.
double lm_log_score(const LanguageModel& lm, const Tokens& tokens);

/// Total order used for every N-best list: score desc, fewer edits, then the
/// sentence and its edit list lexicographically.
bool candidate_before(const ScoredCandidate& a, const ScoredCandidate& b);

/// Beam search over non-overlapping left-to-right rule applications. The identity
/// candidate is always present. `lm` may be null when lm_weight is 0.
std::vector<ScoredCandidate> decode(const RuleTable& table, const LanguageModel* lm,
                                    const Sentence& source, const DecodeConfig& config = {});

}  // namespace seqaug
