#include <array>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "seqaug/experiment.hpp"
#include "seqaug/util.hpp"

namespace seqaug {

namespace {

struct WordPair {
  const char* wrong;
  const char* right;
};

constexpr std::array<WordPair, 4> kEditA{{{"informations", "information"},
                                          {"advices", "advice"},
                                          {"equipments", "equipment"},
                                          {"furnitures", "furniture"}}};
constexpr std::array<WordPair, 4> kEditB{{{"companies", "company"},
                                          {"factories", "factory"},
                                          {"engineers", "engineer"},
                                          {"workers", "worker"}}};
constexpr std::array<const char*, 5> kVerbs{"needed", "wanted", "requested", "received", "shared"};
constexpr std::array<const char*, 4> kQuant{"more", "some", "new", "better"};
constexpr std::array<const char*, 3> kOtherSubjects{"They", "We", "Researchers"};

template <class A>
const auto& pick(Rng& rng, const A& arr) {
  return arr[rng.below(arr.size())];
}

struct Drawn {
  Tokens source;
  Tokens target;
  std::size_t a_pos = 0;
  std::size_t b_pos = 0;  // only meaningful with a plural subject
};

// "The <plural> <verb> <quant> <A-wrong> ." or "<Subject> <verb> <quant> <A-wrong> ."
Drawn draw(Rng& rng, bool plural_subject, bool apply_b) {
  Drawn d;
  const auto& a = pick(rng, kEditA);
  const char* verb = pick(rng, kVerbs);
  const char* quant = pick(rng, kQuant);
  if (plural_subject) {
    const auto& b = pick(rng, kEditB);
    d.source = {"The", b.wrong, verb, quant, a.wrong, "."};
    d.target = {"The", apply_b ? b.right : b.wrong, verb, quant, a.right, "."};
    d.b_pos = 1;
    d.a_pos = 4;
  } else {
    const char* subj = pick(rng, kOtherSubjects);
    d.source = {subj, verb, quant, a.wrong, "."};
    d.target = {subj, verb, quant, a.right, "."};
    d.a_pos = 3;
  }
  return d;
}

const char* correction_of(const std::string& wrong) {
  for (const auto& w : kEditA)
    if (wrong == w.wrong) return w.right;
  for (const auto& w : kEditB)
    if (wrong == w.wrong) return w.right;
  throw std::logic_error("unknown word " + wrong);
}

ParallelPair to_pair(const Drawn& d, Origin origin) {
  ParallelPair p;
  p.source = Sentence::from_tokens(d.source);
  p.target = Sentence::from_tokens(d.target);
  p.origin = std::move(origin);
  return p;
}

}  // namespace

SyntheticData make_st_vs_ptft_data(const StVsPtftConfig& config) {
  if (config.gold_size == 0 || config.augmented_size == 0 || config.probes == 0)
    throw std::invalid_argument("experiment sizes must be positive");
  if (!(config.b_rate >= 0.0 && config.b_rate <= 1.0))
    throw std::invalid_argument("b_rate must be in [0, 1]");
  SyntheticData data;
  data.gold.id = "gold";
  data.augmented.id = "augmented";
  // separate streams so changing one size does not reshuffle the others
  Rng gold_rng(config.seed * 3 + 0);
  Rng aug_rng(config.seed * 3 + 1);
  Rng probe_rng(config.seed * 3 + 2);
  for (std::size_t i = 0; i < config.gold_size; ++i)
    data.gold.pairs.push_back(to_pair(draw(gold_rng, true, false), Origin::gold()));
  for (std::size_t i = 0; i < config.augmented_size; ++i) {
    bool b = aug_rng.bernoulli(config.b_rate);
    data.augmented.pairs.push_back(to_pair(draw(aug_rng, b, b), Origin::augmented("synth")));
  }
  for (std::size_t i = 0; i < config.probes; ++i) {
    Drawn d = draw(probe_rng, true, false);
    GoldAnnotation g;
    g.source = Sentence::from_tokens(d.source);
    GoldEdit e;
    e.begin = d.a_pos;
    e.end = d.a_pos + 1;
    e.corrections = {{d.target[d.a_pos]}};
    g.annotators = {{e}};
    data.probes.push_back(std::move(g));
  }
  return data;
}

const ModeOutcome& StVsPtftResult::outcome(RecipeMode mode) const {
  for (const auto& m : modes)
    if (m.mode == mode) return m;
  throw std::out_of_range("mode not run: " + to_string(mode));
}

StVsPtftResult run_st_vs_ptft(const StVsPtftConfig& config) {
  SyntheticData data = make_st_vs_ptft_data(config);
  StVsPtftResult result;

  std::vector<SliceSpec> specs(2);
  specs[0] = {"gold", "gold.tsv", SliceRole::gold, 1.0, data.gold};
  specs[1] = {"augmented", "augmented.tsv", SliceRole::augmented, 1.0, data.augmented};
  TrainingRecipe recipe;
  recipe.manifest = build_manifest(specs);
  recipe.gamma = config.gamma;
  recipe.seed = config.seed;
  std::vector<Corpus> corpora{data.gold, data.augmented};
  TrainingData td = assemble_training_data(recipe.manifest, corpora);

  std::vector<Sentence> probe_sources;
  for (const auto& p : data.probes) probe_sources.push_back(p.source);

  for (RecipeMode mode : {RecipeMode::ST, RecipeMode::ST_up, RecipeMode::ST_down, RecipeMode::PTFT}) {
    recipe.mode = mode;
    ModelCheckpoint ckpt = run_recipe(recipe, td);
    DecodeConfig dc = config.decode;
    dc.blend = ckpt.blend(config.decode.blend.alpha);

    ModeOutcome out;
    out.mode = mode;
    out.gamma = ckpt.gamma;
    out.probes = data.probes.size();
    std::vector<Sentence> outputs(data.probes.size());
    for (std::size_t i = 0; i < data.probes.size(); ++i) {
      const auto& src = probe_sources[i].tokens;
      auto nbest = decode(ckpt.rules, nullptr, probe_sources[i], dc);
      outputs[i] = nbest.front().sentence;
      const auto& hyp = outputs[i].tokens;
      const std::size_t a_pos = data.probes[i].annotators[0][0].begin;
      const std::size_t b_pos = 1;
      const std::string a_fix = correction_of(src[a_pos]);
      const std::string b_fix = correction_of(src[b_pos]);
      if (hyp.size() == src.size()) {
        out.a_applied += hyp[a_pos] == a_fix ? 1 : 0;
        out.b_applied += hyp[b_pos] == b_fix ? 1 : 0;
      }
      out.a_prob += rule_prob(ckpt.rules, ckpt.rules.key_for(src, a_pos, a_pos + 1), a_fix, dc.blend);
      out.b_prob += rule_prob(ckpt.rules, ckpt.rules.key_for(src, b_pos, b_pos + 1), b_fix, dc.blend);
    }
    out.a_prob /= static_cast<double>(data.probes.size());
    out.b_prob /= static_cast<double>(data.probes.size());
    out.m2 = m2_score(outputs, data.probes);
    result.modes.push_back(std::move(out));
  }
  result.gold = std::move(data.gold);
  result.augmented = std::move(data.augmented);
  result.probes = std::move(data.probes);
  return result;
}

nlohmann::json StVsPtftResult::to_json() const {
  nlohmann::json j;
  j["gold_pairs"] = gold.size();
  j["augmented_pairs"] = augmented.size();
  j["probes"] = probes.size();
  j["modes"] = nlohmann::json::array();
  for (const auto& m : modes) {
    j["modes"].push_back({{"mode", to_string(m.mode)},
                          {"gamma", m.gamma},
                          {"a_applied", m.a_applied},
                          {"b_applied", m.b_applied},
                          {"a_prob", m.a_prob},
                          {"b_prob", m.b_prob},
                          {"precision", m.m2.values.at("precision")},
                          {"recall", m.m2.values.at("recall")},
                          {"f0.5", m.m2.value}});
  }
  return j;
}

std::string format_table(const StVsPtftResult& result) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %6s %8s %8s %8s %8s %7s %7s %7s\n", "mode", "gamma",
                "A_apply", "B_apply", "p(A)", "p(B)", "P", "R", "F0.5");
  os << buf;
  for (const auto& m : result.modes) {
    std::snprintf(buf, sizeof buf, "%-8s %6.2f %4zu/%-3zu %4zu/%-3zu %8.4f %8.4f %7.4f %7.4f %7.4f\n",
                  to_string(m.mode).c_str(), m.gamma, m.a_applied, m.probes, m.b_applied, m.probes,
                  m.a_prob, m.b_prob, m.m2.values.at("precision"), m.m2.values.at("recall"),
                  m.m2.value);
    os << buf;
  }
  return os.str();
}

}  // namespace seqaug
