#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqaug/corpus.hpp"
#include "seqaug/ngram_lm.hpp"

namespace seqaug {

/// Audit record for one filtered pair.
struct FilterDecision {
  std::size_t index = 0;  // position in the input batch
  ParallelPair pair;
  bool retained = false;
  double score_source = 0.0;
  double score_target = 0.0;
  std::string reason;  // empty when the rule was evaluated normally
};

struct FilterResult {
  Corpus retained;
  std::vector<FilterDecision> decisions;
};

using SentenceScorer = std::function<double(const Sentence&)>;

/// Keeps a pair iff fluency(source) < fluency(target), strictly. Pairs with an
/// empty side are rejected with a reason rather than aborting the batch.
FilterResult fluency_filter(std::span<const ParallelPair> pairs, const SentenceScorer& fluency_of,
                            unsigned threads = 1);
FilterResult fluency_filter(std::span<const ParallelPair> pairs, const LanguageModel& lm,
                            unsigned threads = 1);

/// Returns (c, correct) for the best-ranked candidate c that is strictly less fluent
/// than `correct`, or nothing.
std::optional<ParallelPair> select_from_nbest(const Sentence& correct,
                                              std::span<const Sentence> candidates,
                                              const SentenceScorer& fluency_of);
std::optional<ParallelPair> select_from_nbest(const Sentence& correct,
                                              std::span<const Sentence> candidates,
                                              const LanguageModel& lm);

struct FormalityConfig {
  std::vector<int> word_orders{1, 2};
  std::vector<int> char_orders{3, 4, 5};
  int max_iterations = 500;
  double learning_rate = 0.5;
  double l2 = 0.0;
  double tolerance = 1e-6;  // stop once every gradient component is below this
};

/// Linear logistic classifier over binary word and character n-gram features.
class FormalityClassifier {
 public:
  FormalityClassifier() = default;
  FormalityClassifier(FormalityConfig config, std::map<std::string, double> weights, double bias)
      : config_(std::move(config)), weights_(std::move(weights)), bias_(bias) {}

  const FormalityConfig& config() const { return config_; }
  const std::map<std::string, double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  double weight(const std::string& feature) const;

  double score(const Sentence& s) const;  // linear score before the sigmoid
  double prob(const Sentence& s) const;   // P(formal)

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static FormalityClassifier load(std::istream& in);
  static FormalityClassifier load(const std::filesystem::path& path);

 private:
  FormalityConfig config_;
  std::map<std::string, double> weights_;
  double bias_ = 0.0;
};

/// Sorted, de-duplicated feature ids: `w<n>:<tokens>` and `c<n>:<chars>`.
std::vector<std::string> extract_features(const Sentence& s, const FormalityConfig& config);

/// Full-batch gradient descent on mean logistic loss from a zero start.
FormalityClassifier train_formality_classifier(std::span<const Sentence> formal,
                                               std::span<const Sentence> informal,
                                               const FormalityConfig& config = {});

double formality_prob(const FormalityClassifier& clf, const Sentence& s);

inline constexpr double kDefaultSigma = 0.5;

/// Keeps (s, s') iff P+(s') - P+(s) >= sigma.
FilterResult formality_filter(std::span<const ParallelPair> pairs, const SentenceScorer& formality_of,
                              double sigma = kDefaultSigma, unsigned threads = 1);
FilterResult formality_filter(std::span<const ParallelPair> pairs, const FormalityClassifier& clf,
                              double sigma = kDefaultSigma, unsigned threads = 1);

/// One JSON object per decision.
void write_filter_report(std::span<const FilterDecision> decisions, std::ostream& out);

}  // namespace seqaug
