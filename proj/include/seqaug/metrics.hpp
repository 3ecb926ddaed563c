#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqaug/corpus.hpp"
#include "seqaug/edits.hpp"
#include "seqaug/ngram_lm.hpp"
#include "seqaug/rewriter.hpp"

namespace seqaug {

/// Corpus-level value plus the sufficient statistics it was computed from.
struct MetricReport {
  std::string metric;
  double value = 0.0;
  std::map<std::string, double> values;  // e.g. precision / recall, per-order precisions
  std::map<std::string, double> counts;
  std::vector<double> per_sentence;

  nlohmann::json to_json() const;
};

/// (1+b^2)pr / (b^2 p + r); 0 when both are 0.
double f_beta(double p, double r, double beta);

// --- M2 --------------------------------------------------------------------------

/// One gold edit: replace source tokens [begin, end) by any of `corrections`.
struct GoldEdit {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<Tokens> corrections;
  std::string type;
};

struct GoldAnnotation {
  Sentence source;
  std::vector<std::vector<GoldEdit>> annotators;  // at least one, possibly empty

  /// The annotator's corrected sentence using each edit's first correction.
  Tokens corrected(std::size_t annotator) const;
};

std::vector<GoldAnnotation> parse_m2(std::istream& in);
std::vector<GoldAnnotation> read_m2(const std::filesystem::path& path);

struct M2Config {
  double beta = 0.5;
  std::size_t max_alignments = 64;  // cap on minimal alignments searched per sentence
  std::size_t max_unchanged = 2;    // unchanged words a merged system edit may cover to match gold
};

struct M2SentenceStats {
  double tp = 0, fp = 0, fn = 0;
  std::size_t annotator = 0;
  std::vector<EditOp> system_edits;  // the decomposition chosen for that annotator
};

/// Best-matching decomposition of source -> hypothesis against one annotator's edits.
M2SentenceStats m2_match(const Tokens& source, const Tokens& hypothesis,
                         std::span<const GoldEdit> gold, const M2Config& config = {});

/// MaxMatch precision / recall / F. Per sentence the annotator that maximizes the
/// running corpus F is chosen. No proposed edits means precision 1.
MetricReport m2_score(std::span<const Sentence> system, std::span<const GoldAnnotation> gold,
                      const M2Config& config = {}, std::vector<M2SentenceStats>* details = nullptr);

// --- BLEU / GLEU -----------------------------------------------------------------

/// Corpus BLEU-4, multi-reference clipping and closest reference length, no smoothing.
/// per_sentence holds add-one smoothed (n >= 2) sentence BLEU for diagnostics.
MetricReport bleu(std::span<const Sentence> system,
                  std::span<const std::vector<Sentence>> references, int max_order = 4);

/// GLEU: reference n-gram matches minus hypothesis n-grams found in the source but
/// not in the reference (floored at 0 per sentence), with BLEU's brevity penalty.
/// With several references, the mean of the per-reference corpus scores.
MetricReport gleu(std::span<const Sentence> system, std::span<const Sentence> sources,
                  std::span<const std::vector<Sentence>> references, int max_order = 4);

// --- reranking -------------------------------------------------------------------

struct RerankWeights {
  double w_model = 1.0;
  double w_lm = 0.0;
  double w_ins = 0.0;
  double w_del = 0.0;
  double w_sub = 0.0;

  bool operator==(const RerankWeights&) const = default;
};

struct RerankFeatures {
  double model_score = 0.0;
  double lm_score = 0.0;  // -H(candidate)
  std::size_t insertions = 0, deletions = 0, substitutions = 0;

  std::size_t edits() const { return insertions + deletions + substitutions; }
};

RerankFeatures rerank_features(const ScoredCandidate& candidate, const Sentence& source,
                               const LanguageModel* lm);
double rerank_score(const RerankFeatures& f, const RerankWeights& w);

/// Returns the candidate with the highest weighted feature score; ties go to fewer
/// edits, then lexicographic order. `lm` may be null when w_lm is 0.
ScoredCandidate rerank(std::span<const ScoredCandidate> candidates, const Sentence& source,
                       const LanguageModel* lm, const RerankWeights& weights);

struct RerankItem {
  Sentence source;
  std::vector<ScoredCandidate> candidates;
};

struct RerankGrid {
  std::vector<double> w_model{1.0};
  std::vector<double> w_lm{0.0};
  std::vector<double> w_ins{0.0};
  std::vector<double> w_del{0.0};
  std::vector<double> w_sub{0.0};
};

/// Metric over the reranked 1-best outputs of the whole dev set (higher is better).
using DevMetric = std::function<double(const std::vector<Sentence>& outputs)>;

struct TunedWeights {
  RerankWeights weights;
  double metric = 0.0;
};

/// Exhaustive grid search; the first grid point wins ties.
TunedWeights tune_rerank_weights(std::span<const RerankItem> dev, const LanguageModel* lm,
                                 const DevMetric& metric, const RerankGrid& grid);

}  // namespace seqaug
