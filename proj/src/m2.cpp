#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "seqaug/metrics.hpp"
#include "seqaug/util.hpp"

namespace seqaug {

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["metric"] = metric;
  j["value"] = value;
  j["values"] = values;
  j["counts"] = counts;
  j["per_sentence"] = per_sentence;
  return j;
}

double f_beta(double p, double r, double beta) {
  const double b2 = beta * beta;
  const double den = b2 * p + r;
  if (den <= 0.0) return 0.0;
  return (1.0 + b2) * p * r / den;
}

Tokens GoldAnnotation::corrected(std::size_t annotator) const {
  if (annotator >= annotators.size()) throw std::out_of_range("no such annotator");
  std::vector<EditOp> ops;
  for (const auto& g : annotators[annotator]) {
    Tokens src(source.tokens.begin() + static_cast<std::ptrdiff_t>(g.begin),
               source.tokens.begin() + static_cast<std::ptrdiff_t>(g.end));
    ops.push_back(make_edit(g.begin, g.end, std::move(src),
                            g.corrections.empty() ? Tokens{} : g.corrections.front()));
  }
  std::stable_sort(ops.begin(), ops.end(),
                   [](const EditOp& a, const EditOp& b) { return a.begin < b.begin; });
  return apply_edits(source.tokens, ops);
}

namespace {

long parse_long(std::string_view s, std::size_t line_no) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError("line " + std::to_string(line_no) + ": bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

void finish_block(std::vector<GoldAnnotation>& out, GoldAnnotation& cur,
                  std::map<long, std::vector<GoldEdit>>& edits, bool& open) {
  if (!open) return;
  long max_id = edits.empty() ? 0 : edits.rbegin()->first;
  cur.annotators.assign(static_cast<std::size_t>(max_id + 1), {});
  for (auto& [id, list] : edits) {
    std::stable_sort(list.begin(), list.end(), [](const GoldEdit& a, const GoldEdit& b) {
      return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
    });
    cur.annotators[static_cast<std::size_t>(id)] = std::move(list);
  }
  out.push_back(std::move(cur));
  cur = {};
  edits.clear();
  open = false;
}

}  // namespace

std::vector<GoldAnnotation> parse_m2(std::istream& in) {
  std::vector<GoldAnnotation> out;
  GoldAnnotation cur;
  std::map<long, std::vector<GoldEdit>> edits;
  bool open = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish_block(out, cur, edits, open);
      continue;
    }
    if (line.starts_with("S ") || line == "S") {
      finish_block(out, cur, edits, open);
      cur.source = Sentence::from_tokens(split_whitespace(line.size() > 2 ? line.substr(2) : ""));
      open = true;
      continue;
    }
    if (line.starts_with("A ")) {
      if (!open) throw DataError("line " + std::to_string(line_no) + ": edit before sentence");
      auto fields = split_on(line.substr(2), "|||");
      if (fields.size() < 3)
        throw DataError("line " + std::to_string(line_no) + ": malformed edit line");
      auto span = split_whitespace(fields[0]);
      if (span.size() != 2)
        throw DataError("line " + std::to_string(line_no) + ": malformed edit span");
      long b = parse_long(span[0], line_no);
      long e = parse_long(span[1], line_no);
      long annot = fields.size() >= 6 ? parse_long(fields.back(), line_no) : 0;
      if (annot < 0) throw DataError("line " + std::to_string(line_no) + ": bad annotator id");
      auto& list = edits[annot];  // registers the annotator even for noop lines
      const std::string& type = fields[1];
      if (type == "noop" || b < 0) continue;
      const auto n = static_cast<long>(cur.source.tokens.size());
      if (e < b || e > n)
        throw DataError("line " + std::to_string(line_no) + ": edit span out of range");
      GoldEdit g;
      g.begin = static_cast<std::size_t>(b);
      g.end = static_cast<std::size_t>(e);
      g.type = type;
      for (const auto& alt : split_on(fields[2], "||")) {
        if (alt == "-NONE-") g.corrections.push_back({});
        else g.corrections.push_back(split_whitespace(alt));
      }
      list.push_back(std::move(g));
      continue;
    }
    throw DataError("line " + std::to_string(line_no) + ": unexpected line in M2 file");
  }
  finish_block(out, cur, edits, open);
  return out;
}

std::vector<GoldAnnotation> read_m2(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_m2(in);
}

namespace {

struct Step {
  bool match = false;
  std::size_t begin = 0, end = 0;
  Tokens target;
};

std::vector<Step> path_steps(const Tokens& source, const std::vector<EditOp>& ops) {
  std::vector<Step> steps;
  std::size_t i = 0;
  for (const auto& op : ops) {
    for (; i < op.begin; ++i) steps.push_back({true, i, i + 1, {source[i]}});
    steps.push_back({false, op.begin, op.end, op.target});
    i = op.end;
  }
  for (; i < source.size(); ++i) steps.push_back({true, i, i + 1, {source[i]}});
  return steps;
}

bool gold_matches(const GoldEdit& g, std::size_t b, std::size_t e, const Tokens& target) {
  if (g.begin != b || g.end != e) return false;
  return std::find(g.corrections.begin(), g.corrections.end(), target) != g.corrections.end();
}

struct Best {
  double tp = -1;
  double edits = 0;
  std::vector<std::pair<EditOp, int>> chosen;  // edit, matched gold index or -1

  bool better_than(const Best& o) const {
    if (tp != o.tp) return tp > o.tp;
    return edits < o.edits;
  }
};

// Partitions the op steps of one alignment path into system edits, maximizing the
// number of gold matches and then minimizing the number of edits. Merged edits may
// cover up to `max_unchanged` unchanged words only when they match a gold edit.
Best best_partition(const Tokens& source, const std::vector<Step>& steps,
                    std::span<const GoldEdit> gold, std::size_t max_unchanged) {
  const std::size_t k = steps.size();
  std::vector<Best> f(k + 1);
  f[0].tp = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    const Step& last = steps[j - 1];
    if (last.match) f[j] = f[j - 1];
    std::size_t unchanged = 0;
    bool has_op = false;
    Tokens target;
    for (std::size_t s = j; s-- > 0;) {
      const Step& st = steps[s];
      if (st.match && ++unchanged > max_unchanged) break;
      has_op = has_op || !st.match;
      target.insert(target.begin(), st.target.begin(), st.target.end());
      if (!has_op || f[s].tp < 0) continue;
      const std::size_t b = st.begin, e = last.end;
      int matched = -1;
      for (std::size_t g = 0; g < gold.size(); ++g) {
        if (gold_matches(gold[g], b, e, target)) {
          bool used = false;
          for (const auto& c : f[s].chosen) used = used || c.second == static_cast<int>(g);
          if (!used) {
            matched = static_cast<int>(g);
            break;
          }
        }
      }
      if (matched < 0 && unchanged > 0) continue;
      Best cand = f[s];
      cand.tp += matched >= 0 ? 1 : 0;
      cand.edits += 1;
      Tokens src(source.begin() + static_cast<std::ptrdiff_t>(b),
                 source.begin() + static_cast<std::ptrdiff_t>(e));
      cand.chosen.emplace_back(make_edit(b, e, std::move(src), target), matched);
      if (f[j].tp < 0 || cand.better_than(f[j])) f[j] = std::move(cand);
    }
  }
  return f[k];
}

}  // namespace

M2SentenceStats m2_match(const Tokens& source, const Tokens& hypothesis,
                         std::span<const GoldEdit> gold, const M2Config& config) {
  for (const auto& g : gold)
    if (g.end < g.begin || g.end > source.size())
      throw DataError("gold edit span out of range");
  Best best;
  for (const auto& ops : minimal_alignments(source, hypothesis, config.max_alignments)) {
    auto cand = best_partition(source, path_steps(source, ops), gold, config.max_unchanged);
    if (best.tp < 0 || cand.better_than(best)) best = std::move(cand);
  }
  M2SentenceStats st;
  st.tp = best.tp;
  st.fp = best.edits - best.tp;
  st.fn = static_cast<double>(gold.size()) - best.tp;
  for (auto& c : best.chosen) st.system_edits.push_back(std::move(c.first));
  return st;
}

namespace {

double prf(double tp, double fp, double fn, double beta, double* p_out, double* r_out) {
  double p = tp + fp > 0 ? tp / (tp + fp) : 1.0;
  double r = tp + fn > 0 ? tp / (tp + fn) : 1.0;
  if (p_out) *p_out = p;
  if (r_out) *r_out = r;
  return f_beta(p, r, beta);
}

}  // namespace

MetricReport m2_score(std::span<const Sentence> system, std::span<const GoldAnnotation> gold,
                      const M2Config& config, std::vector<M2SentenceStats>* details) {
  if (system.size() != gold.size())
    throw DataError("system has " + std::to_string(system.size()) + " sentences, gold has " +
                    std::to_string(gold.size()));
  double tp = 0, fp = 0, fn = 0;
  MetricReport rep;
  rep.metric = "m2";
  if (details) details->clear();
  for (std::size_t i = 0; i < system.size(); ++i) {
    const auto& g = gold[i];
    std::size_t n_annot = std::max<std::size_t>(1, g.annotators.size());
    M2SentenceStats best;
    double best_f = -1;
    for (std::size_t a = 0; a < n_annot; ++a) {
      std::span<const GoldEdit> edits;
      if (a < g.annotators.size()) edits = g.annotators[a];
      auto st = m2_match(g.source.tokens, system[i].tokens, edits, config);
      st.annotator = a;
      double f = prf(tp + st.tp, fp + st.fp, fn + st.fn, config.beta, nullptr, nullptr);
      bool take = best_f < 0 || f > best_f ||
                  (f == best_f && (st.tp > best.tp ||
                                   (st.tp == best.tp && st.fp + st.fn < best.fp + best.fn)));
      if (take) {
        best_f = f;
        best = std::move(st);
      }
    }
    tp += best.tp;
    fp += best.fp;
    fn += best.fn;
    rep.per_sentence.push_back(prf(best.tp, best.fp, best.fn, config.beta, nullptr, nullptr));
    if (details) details->push_back(std::move(best));
  }
  double p = 0, r = 0;
  rep.value = prf(tp, fp, fn, config.beta, &p, &r);
  rep.values["precision"] = p;
  rep.values["recall"] = r;
  rep.values["f"] = rep.value;
  rep.values["beta"] = config.beta;
  rep.counts["tp"] = tp;
  rep.counts["fp"] = fp;
  rep.counts["fn"] = fn;
  return rep;
}

}  // namespace seqaug
