#include <algorithm>
#include <cmath>

#include "seqaug/metrics.hpp"
#include "seqaug/util.hpp"

namespace seqaug {

namespace {

using Counts = std::map<std::vector<std::string>, int>;

Counts ngram_counts(const Tokens& t, int n) {
  Counts c;
  const auto un = static_cast<std::size_t>(n);
  if (t.size() < un) return c;
  for (std::size_t i = 0; i + un <= t.size(); ++i)
    ++c[Tokens(t.begin() + static_cast<std::ptrdiff_t>(i),
               t.begin() + static_cast<std::ptrdiff_t>(i + un))];
  return c;
}

double ngram_total(const Tokens& t, int n) {
  const auto un = static_cast<std::size_t>(n);
  return t.size() >= un ? static_cast<double>(t.size() - un + 1) : 0.0;
}

double brevity_penalty(double c, double r) {
  if (c <= 0.0) return 0.0;
  return c > r ? 1.0 : std::exp(1.0 - r / c);
}

std::size_t closest_ref_length(std::size_t hyp, const std::vector<Sentence>& refs) {
  std::size_t best = refs.front().tokens.size();
  for (const auto& r : refs) {
    auto len = r.tokens.size();
    auto d = len > hyp ? len - hyp : hyp - len;
    auto bd = best > hyp ? best - hyp : hyp - best;
    if (d < bd || (d == bd && len < best)) best = len;
  }
  return best;
}

void check_max_order(int max_order) {
  if (max_order < 1) throw std::invalid_argument("max_order must be >= 1");
}

}  // namespace

MetricReport bleu(std::span<const Sentence> system,
                  std::span<const std::vector<Sentence>> references, int max_order) {
  check_max_order(max_order);
  if (system.size() != references.size())
    throw DataError("system has " + std::to_string(system.size()) + " sentences, references " +
                    std::to_string(references.size()));
  std::vector<double> matched(static_cast<std::size_t>(max_order), 0.0);
  std::vector<double> total(static_cast<std::size_t>(max_order), 0.0);
  double c = 0, r = 0;
  MetricReport rep;
  rep.metric = "bleu";
  for (std::size_t i = 0; i < system.size(); ++i) {
    const auto& refs = references[i];
    if (refs.empty()) throw DataError("sentence " + std::to_string(i + 1) + " has no reference");
    const auto& hyp = system[i].tokens;
    const auto ref_len = closest_ref_length(hyp.size(), refs);
    c += static_cast<double>(hyp.size());
    r += static_cast<double>(ref_len);
    double sent_log = 0;
    for (int n = 1; n <= max_order; ++n) {
      Counts max_ref;
      for (const auto& ref : refs)
        for (const auto& [g, k] : ngram_counts(ref.tokens, n)) max_ref[g] = std::max(max_ref[g], k);
      double m = 0;
      for (const auto& [g, k] : ngram_counts(hyp, n)) {
        auto it = max_ref.find(g);
        if (it != max_ref.end()) m += std::min(k, it->second);
      }
      double t = ngram_total(hyp, n);
      matched[static_cast<std::size_t>(n - 1)] += m;
      total[static_cast<std::size_t>(n - 1)] += t;
      double sm = n == 1 ? m : m + 1, st = n == 1 ? t : t + 1;
      sent_log += (sm > 0 && st > 0) ? std::log(sm / st) : -INFINITY;
    }
    double bp = brevity_penalty(static_cast<double>(hyp.size()), static_cast<double>(ref_len));
    rep.per_sentence.push_back(std::isinf(sent_log) ? 0.0 : bp * std::exp(sent_log / max_order));
  }
  double log_sum = 0;
  bool zero = false;
  for (int n = 0; n < max_order; ++n) {
    auto un = static_cast<std::size_t>(n);
    double p = total[un] > 0 ? matched[un] / total[un] : 0.0;
    rep.values["p" + std::to_string(n + 1)] = p;
    rep.counts["match" + std::to_string(n + 1)] = matched[un];
    rep.counts["total" + std::to_string(n + 1)] = total[un];
    if (p <= 0) zero = true;
    else log_sum += std::log(p);
  }
  double bp = brevity_penalty(c, r);
  rep.values["bp"] = bp;
  rep.counts["hyp_len"] = c;
  rep.counts["ref_len"] = r;
  rep.value = zero ? 0.0 : bp * std::exp(log_sum / max_order);
  return rep;
}

MetricReport gleu(std::span<const Sentence> system, std::span<const Sentence> sources,
                  std::span<const std::vector<Sentence>> references, int max_order) {
  check_max_order(max_order);
  if (system.size() != references.size() || system.size() != sources.size())
    throw DataError("system, source and reference counts differ");
  std::size_t n_refs = 0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (references[i].empty())
      throw DataError("sentence " + std::to_string(i + 1) + " has no reference");
    n_refs = std::max(n_refs, references[i].size());
  }
  MetricReport rep;
  rep.metric = "gleu";
  rep.per_sentence.assign(system.size(), 0.0);
  if (system.empty()) return rep;
  const auto order = static_cast<std::size_t>(max_order);
  double score_sum = 0;
  for (std::size_t j = 0; j < n_refs; ++j) {
    std::vector<double> num(order, 0.0), den(order, 0.0);
    double c = 0, r = 0;
    for (std::size_t i = 0; i < system.size(); ++i) {
      const auto& hyp = system[i].tokens;
      const auto& src = sources[i].tokens;
      const auto& ref = references[i][j % references[i].size()].tokens;
      c += static_cast<double>(hyp.size());
      r += static_cast<double>(ref.size());
      double sent_log = 0;
      for (int n = 1; n <= max_order; ++n) {
        auto h = ngram_counts(hyp, n), rc = ngram_counts(ref, n), sc = ngram_counts(src, n);
        double match = 0, penalty = 0;
        for (const auto& [g, k] : h) {
          auto ri = rc.find(g);
          int rk = ri == rc.end() ? 0 : ri->second;
          auto si = sc.find(g);
          int sk = si == sc.end() ? 0 : si->second;
          match += std::min(k, rk);
          penalty += std::min(k, std::max(sk - rk, 0));
        }
        double nm = std::max(match - penalty, 0.0);
        double dn = ngram_total(hyp, n);
        num[static_cast<std::size_t>(n - 1)] += nm;
        den[static_cast<std::size_t>(n - 1)] += dn;
        sent_log += std::log((nm + 1) / (dn + 1));
      }
      double bp = brevity_penalty(static_cast<double>(hyp.size()), static_cast<double>(ref.size()));
      rep.per_sentence[i] += bp * std::exp(sent_log / max_order) / static_cast<double>(n_refs);
    }
    double log_sum = 0;
    bool zero = false;
    for (std::size_t n = 0; n < order; ++n) {
      if (num[n] <= 0 || den[n] <= 0) zero = true;
      else log_sum += std::log(num[n] / den[n]);
    }
    double s = zero ? 0.0 : brevity_penalty(c, r) * std::exp(log_sum / max_order);
    rep.values["ref" + std::to_string(j)] = s;
    score_sum += s;
  }
  rep.value = score_sum / static_cast<double>(n_refs);
  rep.counts["references"] = static_cast<double>(n_refs);
  return rep;
}

}  // namespace seqaug
