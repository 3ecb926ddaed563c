#include "seqaug/rewriter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "seqaug/util.hpp"

namespace seqaug {

namespace {

constexpr std::string_view kEmptyTarget = "<eps>";
constexpr std::string_view kKeepRow = "*";

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Tokens slice(const Tokens& t, std::size_t begin, std::size_t end) {
  return Tokens(t.begin() + begin, t.begin() + end);
}

std::string join_span(const Tokens& t, std::size_t begin, std::size_t end) {
  return join(slice(t, begin, end));
}

}  // namespace

const SourceEntry* RuleTable::find(const RuleKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<EditRule> RuleTable::rules() const {
  std::vector<EditRule> out;
  for (const auto& [key, entry] : entries_)
    for (const auto& [target, counts] : entry.edits) out.push_back({key, target, counts, entry.keep});
  return out;
}

void RuleTable::add_keep(const RuleKey& key, Phase phase, double weight) {
  entries_[key].keep[phase] += weight;
}

void RuleTable::add_edit(const RuleKey& key, const std::string& target, Phase phase, double weight) {
  entries_[key].edits[target][phase] += weight;
}

void RuleTable::merge(const RuleTable& other) {
  if (!(options_ == other.options_)) throw std::invalid_argument("RuleTable::merge: option mismatch");
  for (const auto& [key, entry] : other.entries_) {
    auto& mine = entries_[key];
    mine.keep.pretrain += entry.keep.pretrain;
    mine.keep.finetune += entry.keep.finetune;
    for (const auto& [target, c] : entry.edits) {
      auto& m = mine.edits[target];
      m.pretrain += c.pretrain;
      m.finetune += c.finetune;
    }
  }
}

void RuleTable::clear_phase(Phase phase) {
  for (auto& [key, entry] : entries_) {
    entry.keep[phase] = 0.0;
    for (auto& [target, c] : entry.edits) c[phase] = 0.0;
  }
}

RuleKey RuleTable::key_for(const Tokens& tokens, std::size_t begin, std::size_t end) const {
  RuleKey key;
  key.source = join_span(tokens, begin, end);
  if (options_.left_context) key.context = begin > 0 ? tokens[begin - 1] : std::string(kBos);
  return key;
}

void learn_rules(RuleTable& table, const Corpus& corpus, Phase phase) {
  const std::size_t max_n = table.options().max_ngram;
  for (const auto& pair : corpus.pairs) {
    const auto& src = pair.source.tokens;
    const auto& tgt = pair.target.tokens;
    const double w = pair.weight;
    std::vector<bool> covered(src.size(), false);
    for (const auto& op : extract_edits(src, tgt)) {
      std::size_t begin = op.begin, end = op.end;
      Tokens target = op.target;
      if (begin == end) {
        // insertions are anchored on a neighbouring source token
        if (src.empty()) continue;
        if (begin > 0) {
          --begin;
          target.insert(target.begin(), src[begin]);
        } else {
          ++end;
          target.push_back(src[0]);
        }
      }
      for (std::size_t i = begin; i < end; ++i) covered[i] = true;
      if (end - begin <= max_n) table.add_edit(table.key_for(src, begin, end), join(target), phase, w);
    }
    for (std::size_t n = 1; n <= max_n; ++n) {
      for (std::size_t i = 0; i + n <= src.size(); ++i) {
        if (std::any_of(covered.begin() + i, covered.begin() + i + n, [](bool c) { return c; }))
          continue;
        table.add_keep(table.key_for(src, i, i + n), phase, w);
      }
    }
  }
}

RuleTable learn_rules(const Corpus& corpus, Phase phase, RuleOptions options) {
  RuleTable table(options);
  learn_rules(table, corpus, phase);
  return table;
}

double rule_prob(const PhaseCounts& edit, const PhaseCounts& keep, const BlendConfig& blend) {
  if (!(blend.alpha > 0.0)) throw std::invalid_argument("rule_prob: alpha must be > 0");
  const double e = blend.gamma * edit.pretrain + edit.finetune;
  const double k = blend.gamma * keep.pretrain + keep.finetune;
  return (e + blend.alpha) / (e + k + 2.0 * blend.alpha);
}

double rule_prob(const RuleTable& table, const RuleKey& key, const std::string& target,
                 const BlendConfig& blend) {
  const auto* entry = table.find(key);
  PhaseCounts none;
  if (!entry) return rule_prob(none, none, blend);
  auto it = entry->edits.find(target);
  return rule_prob(it == entry->edits.end() ? none : it->second, entry->keep, blend);
}

std::vector<RuleMatch> match_rules(const RuleTable& table, const Tokens& source,
                                   const DecodeConfig& config) {
  std::vector<RuleMatch> out;
  const std::size_t max_n = table.options().max_ngram;
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t n = 1; n <= max_n && i + n <= source.size(); ++n) {
      const auto* entry = table.find(table.key_for(source, i, i + n));
      if (!entry) continue;
      for (const auto& [target, counts] : entry->edits) {
        // no blended edit evidence means no rule (e.g. pre-train-only rules at gamma 0)
        if (config.blend.gamma * counts.pretrain + counts.finetune <= 0.0) continue;
        const double p = rule_prob(counts, entry->keep, config.blend);
        if (p < config.edit_threshold) continue;
        out.push_back({i, i + n, split_whitespace(target), p});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const RuleMatch& a, const RuleMatch& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    if (a.end != b.end) return a.end < b.end;
    return a.target < b.target;
  });
  return out;
}

double lm_log_score(const LanguageModel& lm, const Tokens& tokens) {
  std::vector<std::string> ctx{std::string(kBos)};
  double sum = 0.0;
  for (const auto& t : tokens) {
    sum += lm.log_prob(t, ctx);
    ctx.push_back(t);
  }
  sum += lm.log_prob(kEos, ctx);
  return sum / static_cast<double>(tokens.size() + 1);
}

bool candidate_before(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.edits.size() != b.edits.size()) return a.edits.size() < b.edits.size();
  if (a.sentence.tokens != b.sentence.tokens) return a.sentence.tokens < b.sentence.tokens;
  return a.edits < b.edits;
}

namespace {

struct BeamState {
  std::size_t pos = 0;
  Tokens out;
  std::vector<EditOp> edits;
  double settled = 0.0;
  std::vector<std::size_t> pending;  // skipped matches whose fate is not known yet

  double priority(const std::vector<RuleMatch>& m) const {
    double p = settled;
    for (auto i : pending) p += std::log1p(-m[i].prob);
    return p;
  }
};

}  // namespace

std::vector<ScoredCandidate> decode(const RuleTable& table, const LanguageModel* lm,
                                    const Sentence& source, const DecodeConfig& config) {
  if (config.nbest < 1) throw std::invalid_argument("decode: nbest must be >= 1");
  if (config.lm_weight != 0.0 && lm == nullptr)
    throw std::invalid_argument("decode: lm_weight is nonzero but no LM was given");
  const Tokens& src = source.tokens;
  const auto matches = match_rules(table, src, config);
  std::vector<std::vector<std::size_t>> starting(src.size() + 1);
  for (std::size_t i = 0; i < matches.size(); ++i) starting[matches[i].begin].push_back(i);

  const std::size_t beam = std::max<std::size_t>(config.beam, 1);
  std::vector<std::vector<BeamState>> buckets(src.size() + 1);
  buckets[0].push_back({});

  auto settle = [&](BeamState& st) {
    std::vector<std::size_t> still;
    for (auto i : st.pending) {
      if (matches[i].end <= st.pos) st.settled += std::log1p(-matches[i].prob);
      else still.push_back(i);
    }
    st.pending = std::move(still);
  };

  for (std::size_t pos = 0; pos < src.size(); ++pos) {
    auto& bucket = buckets[pos];
    std::stable_sort(bucket.begin(), bucket.end(), [&](const BeamState& a, const BeamState& b) {
      const double pa = a.priority(matches), pb = b.priority(matches);
      if (pa != pb) return pa > pb;
      if (a.edits.size() != b.edits.size()) return a.edits.size() < b.edits.size();
      if (a.out != b.out) return a.out < b.out;
      return a.edits < b.edits;
    });
    if (bucket.size() > beam) bucket.resize(beam);

    for (const auto& st : bucket) {
      BeamState copy = st;
      copy.pos = pos + 1;
      copy.out.push_back(src[pos]);
      for (auto i : starting[pos]) copy.pending.push_back(i);
      settle(copy);
      buckets[pos + 1].push_back(std::move(copy));

      for (auto i : starting[pos]) {
        const auto& m = matches[i];
        BeamState next = st;
        std::vector<std::size_t> kept;
        for (auto j : next.pending)
          if (matches[j].end <= pos) kept.push_back(j);
        next.pending = std::move(kept);
        next.pos = m.end;
        next.out.insert(next.out.end(), m.target.begin(), m.target.end());
        next.edits.push_back(make_edit(m.begin, m.end, slice(src, m.begin, m.end), m.target));
        next.settled += std::log(m.prob);
        settle(next);
        buckets[m.end].push_back(std::move(next));
      }
    }
    bucket.clear();
    bucket.shrink_to_fit();
  }

  auto finish = [&](BeamState st) {
    st.pos = src.size();
    settle(st);
    ScoredCandidate c;
    c.sentence = Sentence::from_tokens(std::move(st.out));
    c.model_score = st.settled;
    if (lm != nullptr && config.lm_weight != 0.0) c.lm_score = lm_log_score(*lm, c.sentence.tokens);
    c.score = c.model_score + config.lm_weight * c.lm_score;
    c.edits = std::move(st.edits);
    return c;
  };

  std::vector<ScoredCandidate> out;
  bool have_identity = false;
  for (auto& st : buckets[src.size()]) {
    out.push_back(finish(std::move(st)));
    have_identity = have_identity || out.back().edits.empty();
  }
  if (!have_identity) {
    BeamState identity;
    identity.out = src;
    for (std::size_t i = 0; i < matches.size(); ++i) identity.pending.push_back(i);
    out.push_back(finish(std::move(identity)));
  }
  std::sort(out.begin(), out.end(), candidate_before);
  if (out.size() > config.nbest) {
    // the identity candidate survives truncation
    auto id = std::find_if(out.begin(), out.end(),
                           [](const ScoredCandidate& c) { return c.edits.empty(); });
    if (static_cast<std::size_t>(id - out.begin()) >= config.nbest) {
      ScoredCandidate keep = *id;
      out.resize(config.nbest);
      out.back() = std::move(keep);
    } else {
      out.resize(config.nbest);
    }
  }
  return out;
}

void RuleTable::save(std::ostream& out) const {
  out << "#rules v1 max_ngram=" << options_.max_ngram
      << " left_context=" << (options_.left_context ? 1 : 0) << '\n';
  for (const auto& [key, entry] : entries_) {
    const std::string head = key.context + "|" + key.source;
    auto row = [&](std::string_view target, const PhaseCounts& e) {
      out << head << '\t' << target << '\t' << format_real(e.pretrain) << '\t'
          << format_real(entry.keep.pretrain) << '\t' << format_real(e.finetune) << '\t'
          << format_real(entry.keep.finetune) << '\n';
    };
    row(kKeepRow, PhaseCounts{});
    for (const auto& [target, counts] : entry.edits)
      row(target.empty() ? kEmptyTarget : std::string_view(target), counts);
  }
}

void RuleTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  save(out);
}

RuleTable RuleTable::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("#rules v1", 0) != 0)
    throw DataError("line 1: expected header '#rules v1'");
  RuleOptions opts;
  if (auto p = line.find("max_ngram="); p != std::string::npos)
    opts.max_ngram = std::stoul(line.substr(p + 10));
  if (auto p = line.find("left_context="); p != std::string::npos)
    opts.left_context = line.substr(p + 13, 1) == "1";
  RuleTable table(opts);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split(line, "\t");
    if (f.size() != 6)
      throw DataError("line " + std::to_string(line_no) + ": expected 6 tab-separated fields");
    auto bar = f[0].find('|');
    if (bar == std::string::npos)
      throw DataError("line " + std::to_string(line_no) + ": expected context|source");
    RuleKey key{f[0].substr(0, bar), f[0].substr(bar + 1)};
    double v[4];
    try {
      for (int i = 0; i < 4; ++i) v[i] = std::stod(f[2 + i]);
    } catch (const std::exception&) {
      throw DataError("line " + std::to_string(line_no) + ": bad count");
    }
    auto& entry = table.entries_[key];
    entry.keep = {v[1], v[3]};
    if (f[1] == kKeepRow) continue;
    const std::string target = f[1] == kEmptyTarget ? std::string() : f[1];
    entry.edits[target] = {v[0], v[2]};
  }
  return table;
}

RuleTable RuleTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return load(in);
}

}  // namespace seqaug
