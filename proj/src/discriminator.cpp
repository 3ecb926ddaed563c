#include "seqaug/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "seqaug/util.hpp"

namespace seqaug {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

template <typename Rule>
FilterResult run_filter(std::span<const ParallelPair> pairs, const SentenceScorer& scorer,
                        unsigned threads, Rule keep) {
  FilterResult result;
  result.decisions.resize(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    auto& d = result.decisions[i];
    d.index = i;
    d.pair = pairs[i];
    if (pairs[i].source.empty() || pairs[i].target.empty()) {
      d.reason = pairs[i].source.empty() ? "empty source" : "empty target";
      return;
    }
    try {
      d.score_source = scorer(pairs[i].source);
      d.score_target = scorer(pairs[i].target);
    } catch (const std::exception& e) {
      d.reason = std::string("scoring failed: ") + e.what();
      return;
    }
    d.retained = keep(d.score_source, d.score_target);
  });
  for (const auto& d : result.decisions)
    if (d.retained) result.retained.pairs.push_back(d.pair);
  return result;
}

SentenceScorer lm_fluency(const LanguageModel& lm) {
  return [&lm](const Sentence& s) { return fluency(lm, s); };
}

void add_char_ngrams(const std::string& text, int n, std::set<std::string>& out) {
  if (static_cast<int>(text.size()) < n) return;
  for (std::size_t i = 0; i + n <= text.size(); ++i)
    out.insert("c" + std::to_string(n) + ":" + text.substr(i, n));
}

}  // namespace

FilterResult fluency_filter(std::span<const ParallelPair> pairs, const SentenceScorer& fluency_of,
                            unsigned threads) {
  return run_filter(pairs, fluency_of, threads, [](double src, double tgt) { return src < tgt; });
}

FilterResult fluency_filter(std::span<const ParallelPair> pairs, const LanguageModel& lm,
                            unsigned threads) {
  return fluency_filter(pairs, lm_fluency(lm), threads);
}

std::optional<ParallelPair> select_from_nbest(const Sentence& correct,
                                              std::span<const Sentence> candidates,
                                              const SentenceScorer& fluency_of) {
  if (candidates.empty() || correct.empty()) return std::nullopt;
  const double bar = fluency_of(correct);
  for (const auto& c : candidates) {
    if (c.empty()) continue;
    if (fluency_of(c) < bar) return ParallelPair{c, correct, Origin::augmented("bt"), 1.0};
  }
  return std::nullopt;
}

std::optional<ParallelPair> select_from_nbest(const Sentence& correct,
                                              std::span<const Sentence> candidates,
                                              const LanguageModel& lm) {
  return select_from_nbest(correct, candidates, lm_fluency(lm));
}

std::vector<std::string> extract_features(const Sentence& s, const FormalityConfig& config) {
  std::set<std::string> feats;
  for (int n : config.word_orders) {
    if (n < 1) continue;
    for (std::size_t i = 0; i + n <= s.tokens.size(); ++i) {
      std::vector<std::string> gram(s.tokens.begin() + i, s.tokens.begin() + i + n);
      feats.insert("w" + std::to_string(n) + ":" + join(gram));
    }
  }
  const std::string padded = " " + s.joined() + " ";
  for (int n : config.char_orders)
    if (n >= 1) add_char_ngrams(padded, n, feats);
  return {feats.begin(), feats.end()};
}

double FormalityClassifier::weight(const std::string& feature) const {
  auto it = weights_.find(feature);
  return it == weights_.end() ? 0.0 : it->second;
}

double FormalityClassifier::score(const Sentence& s) const {
  double z = bias_;
  for (const auto& f : extract_features(s, config_)) z += weight(f);
  return z;
}

double FormalityClassifier::prob(const Sentence& s) const { return sigmoid(score(s)); }

double formality_prob(const FormalityClassifier& clf, const Sentence& s) { return clf.prob(s); }

FormalityClassifier train_formality_classifier(std::span<const Sentence> formal,
                                               std::span<const Sentence> informal,
                                               const FormalityConfig& config) {
  if (formal.empty() || informal.empty()) throw DataError("empty class");

  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> rows;
  std::vector<double> labels;
  std::vector<std::vector<std::string>> raw_rows;
  auto collect = [&](std::span<const Sentence> sents, double label) {
    for (const auto& s : sents) {
      raw_rows.push_back(extract_features(s, config));
      labels.push_back(label);
      for (const auto& f : raw_rows.back()) index.emplace(f, 0);
    }
  };
  collect(formal, 1.0);
  collect(informal, 0.0);
  std::size_t next = 0;
  for (auto& [f, id] : index) id = next++;
  for (const auto& r : raw_rows) {
    std::vector<std::size_t> ids;
    ids.reserve(r.size());
    for (const auto& f : r) ids.push_back(index.at(f));
    std::sort(ids.begin(), ids.end());
    rows.push_back(std::move(ids));
  }

  std::vector<double> w(index.size(), 0.0), grad(index.size());
  double b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double z = b;
      for (auto j : rows[i]) z += w[j];
      const double err = sigmoid(z) - labels[i];
      grad_b += err;
      for (auto j : rows[i]) grad[j] += err;
    }
    double worst = std::abs(grad_b * inv_n);
    for (std::size_t j = 0; j < w.size(); ++j) {
      grad[j] = grad[j] * inv_n + config.l2 * w[j];
      worst = std::max(worst, std::abs(grad[j]));
    }
    if (worst < config.tolerance) break;
    b -= config.learning_rate * grad_b * inv_n;
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= config.learning_rate * grad[j];
  }

  std::map<std::string, double> weights;
  for (const auto& [f, id] : index)
    if (w[id] != 0.0) weights.emplace(f, w[id]);
  return FormalityClassifier(config, std::move(weights), b);
}

FilterResult formality_filter(std::span<const ParallelPair> pairs, const SentenceScorer& formality_of,
                              double sigma, unsigned threads) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw std::invalid_argument("sigma must be in [0,1]");
  return run_filter(pairs, formality_of, threads,
                    [sigma](double src, double tgt) { return tgt - src >= sigma; });
}

FilterResult formality_filter(std::span<const ParallelPair> pairs, const FormalityClassifier& clf,
                              double sigma, unsigned threads) {
  return formality_filter(
      pairs, [&clf](const Sentence& s) { return clf.prob(s); }, sigma, threads);
}

void FormalityClassifier::save(std::ostream& out) const {
  out << "#formality v1\n";
  out << "word_orders";
  for (int n : config_.word_orders) out << ' ' << n;
  out << "\nchar_orders";
  for (int n : config_.char_orders) out << ' ' << n;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", bias_);
  out << "\nbias " << buf << '\n';
  for (const auto& [f, wt] : weights_) {
    std::snprintf(buf, sizeof buf, "%.17g", wt);
    out << f << '\t' << buf << '\n';
  }
}

void FormalityClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  save(out);
}

FormalityClassifier FormalityClassifier::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "#formality v1")
    throw DataError("line 1: expected header '#formality v1'");
  FormalityConfig cfg;
  double bias = 0.0;
  std::map<std::string, double> weights;
  auto read_orders = [&](const std::string& l, const std::string& key, std::vector<int>& dst) {
    if (l.rfind(key, 0) != 0) return false;
    dst.clear();
    std::istringstream ss(l.substr(key.size()));
    int n;
    while (ss >> n) dst.push_back(n);
    return true;
  };
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (read_orders(line, "word_orders", cfg.word_orders)) continue;
    if (read_orders(line, "char_orders", cfg.char_orders)) continue;
    if (line.rfind("bias ", 0) == 0) {
      bias = std::stod(line.substr(5));
      continue;
    }
    auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw DataError("line " + std::to_string(line_no) + ": expected feature<TAB>weight");
    try {
      weights[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw DataError("line " + std::to_string(line_no) + ": bad weight");
    }
  }
  return FormalityClassifier(cfg, std::move(weights), bias);
}

FormalityClassifier FormalityClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return load(in);
}

void write_filter_report(std::span<const FilterDecision> decisions, std::ostream& out) {
  for (const auto& d : decisions) {
    nlohmann::json obj = {{"index", d.index},
                          {"source", d.pair.source.raw},
                          {"target", d.pair.target.raw},
                          {"score_source", d.score_source},
                          {"score_target", d.score_target},
                          {"retained", d.retained},
                          {"reason", d.reason}};
    out << obj.dump() << '\n';
  }
}

}  // namespace seqaug
