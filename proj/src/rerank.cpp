#include <stdexcept>

#include "seqaug/metrics.hpp"

namespace seqaug {

RerankFeatures rerank_features(const ScoredCandidate& candidate, const Sentence& source,
                               const LanguageModel* lm) {
  RerankFeatures f;
  f.model_score = candidate.model_score;
  if (lm) f.lm_score = lm_log_score(*lm, candidate.sentence.tokens);
  auto ops = extract_edits(source.tokens, candidate.sentence.tokens);
  f.insertions = count_kind(ops, EditKind::insertion);
  f.deletions = count_kind(ops, EditKind::deletion);
  f.substitutions = count_kind(ops, EditKind::substitution);
  return f;
}

double rerank_score(const RerankFeatures& f, const RerankWeights& w) {
  return w.w_model * f.model_score + w.w_lm * f.lm_score +
         w.w_ins * static_cast<double>(f.insertions) +
         w.w_del * static_cast<double>(f.deletions) +
         w.w_sub * static_cast<double>(f.substitutions);
}

namespace {

std::size_t best_index(std::span<const ScoredCandidate> candidates, const Sentence& source,
                       const LanguageModel* lm, const RerankWeights& weights,
                       const std::vector<RerankFeatures>* cached = nullptr) {
  if (candidates.empty()) throw std::invalid_argument("rerank: empty candidate list");
  if (weights.w_lm != 0.0 && !lm && !cached)
    throw std::invalid_argument("rerank: w_lm is nonzero but no language model was given");
  std::size_t best = 0;
  double best_score = 0;
  std::size_t best_edits = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    RerankFeatures f = cached ? (*cached)[i] : rerank_features(candidates[i], source, lm);
    double s = rerank_score(f, weights);
    bool take = i == 0 || s > best_score ||
                (s == best_score &&
                 (f.edits() < best_edits ||
                  (f.edits() == best_edits &&
                   candidates[i].sentence.tokens < candidates[best].sentence.tokens)));
    if (take) {
      best = i;
      best_score = s;
      best_edits = f.edits();
    }
  }
  return best;
}

}  // namespace

ScoredCandidate rerank(std::span<const ScoredCandidate> candidates, const Sentence& source,
                       const LanguageModel* lm, const RerankWeights& weights) {
  return candidates[best_index(candidates, source, lm, weights)];
}

TunedWeights tune_rerank_weights(std::span<const RerankItem> dev, const LanguageModel* lm,
                                 const DevMetric& metric, const RerankGrid& grid) {
  if (grid.w_model.empty() || grid.w_lm.empty() || grid.w_ins.empty() || grid.w_del.empty() ||
      grid.w_sub.empty())
    throw std::invalid_argument("rerank grid has an empty axis");
  bool lm_needed = false;
  for (double w : grid.w_lm) lm_needed = lm_needed || w != 0.0;
  if (lm_needed && !lm) throw std::invalid_argument("rerank grid uses w_lm but no LM was given");
  std::vector<std::vector<RerankFeatures>> features(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    if (dev[i].candidates.empty()) throw std::invalid_argument("rerank: empty candidate list");
    for (const auto& c : dev[i].candidates)
      features[i].push_back(rerank_features(c, dev[i].source, lm_needed ? lm : nullptr));
  }
  TunedWeights best;
  bool have = false;
  for (double wm : grid.w_model)
    for (double wl : grid.w_lm)
      for (double wi : grid.w_ins)
        for (double wd : grid.w_del)
          for (double ws : grid.w_sub) {
            RerankWeights w{wm, wl, wi, wd, ws};
            std::vector<Sentence> outputs;
            outputs.reserve(dev.size());
            for (std::size_t i = 0; i < dev.size(); ++i)
              outputs.push_back(
                  dev[i].candidates[best_index(dev[i].candidates, dev[i].source, lm, w,
                                               &features[i])]
                      .sentence);
            double m = metric(outputs);
            if (!have || m > best.metric) {
              best = {w, m};
              have = true;
            }
          }
  return best;
}

}  // namespace seqaug
