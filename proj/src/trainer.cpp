#include "seqaug/trainer.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "seqaug/util.hpp"

namespace seqaug {

using nlohmann::json;

void PhaseConfig::validate() const {
  if (!(lr_base > 0.0)) throw std::invalid_argument("phase: lr_base must be > 0");
  if (warmup_steps <= 0 || warmup_steps > total_steps)
    throw std::invalid_argument("phase: need 0 < warmup_steps <= total_steps");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("phase: dropout must be in [0,1)");
}

std::optional<PhaseConfig> phase_preset(const std::string& name) {
  if (name == "gec-pretrain") return presets::gec_pretrain;
  if (name == "gec-finetune") return presets::gec_finetune;
  if (name == "fst-pretrain") return presets::fst_pretrain;
  if (name == "fst-finetune") return presets::fst_finetune;
  return std::nullopt;
}

double lr_at(const PhaseConfig& cfg, long step) {
  if (step < 1) throw std::invalid_argument("lr_at: step must be >= 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(cfg.warmup_steps);
  if (step <= cfg.warmup_steps) return cfg.lr_base * (s / w);
  return cfg.lr_base * std::sqrt(w / s);
}

std::string to_string(RecipeMode mode) {
  switch (mode) {
    case RecipeMode::ST: return "ST";
    case RecipeMode::ST_up: return "ST_up";
    case RecipeMode::ST_down: return "ST_down";
    case RecipeMode::PTFT: return "PTFT";
  }
  return "PTFT";
}

RecipeMode parse_recipe_mode(const std::string& text) {
  if (text == "ST") return RecipeMode::ST;
  if (text == "ST_up" || text == "ST-up") return RecipeMode::ST_up;
  if (text == "ST_down" || text == "ST-down") return RecipeMode::ST_down;
  if (text == "PTFT" || text == "PT&FT") return RecipeMode::PTFT;
  throw DataError("unknown recipe mode '" + text + "'");
}

namespace {

json phase_json(const PhaseConfig& p) {
  return {{"lr_base", p.lr_base},
          {"warmup_steps", p.warmup_steps},
          {"total_steps", p.total_steps},
          {"dropout", p.dropout}};
}

PhaseConfig phase_from_json(const json& j) {
  if (j.is_string()) {
    auto preset = phase_preset(j.get<std::string>());
    if (!preset) throw DataError("unknown phase preset '" + j.get<std::string>() + "'");
    return *preset;
  }
  PhaseConfig p;
  p.lr_base = j.at("lr_base").get<double>();
  p.warmup_steps = j.at("warmup_steps").get<long>();
  p.total_steps = j.at("total_steps").get<long>();
  p.dropout = j.value("dropout", 0.0);
  return p;
}

json recipe_settings(const TrainingRecipe& r) {
  json slices = json::array();
  for (const auto& s : r.manifest.slices)
    slices.push_back({s.name, to_string(s.role), s.weight, s.size, s.checksum});
  return {{"mode", to_string(r.mode)},
          {"pretrain", phase_json(r.pretrain_phase)},
          {"finetune", phase_json(r.finetune_phase)},
          {"gamma", r.gamma},
          {"seed", r.seed},
          {"max_ngram", r.rule_options.max_ngram},
          {"left_context", r.rule_options.left_context},
          {"slices", slices}};
}

void collect(ModelCheckpoint& ckpt, const EvalHook& hook, const std::string& phase,
             double gamma) {
  if (!hook) return;
  for (const auto& [k, v] : hook(phase, ckpt.rules, gamma)) ckpt.metrics[phase + "." + k] = v;
}

}  // namespace

std::string recipe_fingerprint(const TrainingRecipe& recipe) {
  return hex64(fnv1a64(recipe_settings(recipe).dump()));
}

ModelCheckpoint run_recipe(const TrainingRecipe& recipe, const TrainingData& data,
                           const EvalHook& eval_hook) {
  validate_manifest(recipe.manifest);
  recipe.pretrain_phase.validate();
  recipe.finetune_phase.validate();
  if (!(recipe.gamma >= 0.0)) throw std::invalid_argument("recipe: gamma must be >= 0");

  ModelCheckpoint ckpt;
  ckpt.rules = RuleTable(recipe.rule_options);
  ckpt.mode = recipe.mode;
  ckpt.fingerprint = recipe_fingerprint(recipe);

  if (recipe.mode == RecipeMode::PTFT) {
    ckpt.gamma = recipe.gamma;
    learn_rules(ckpt.rules, data.augmented, Phase::pretrain);
    collect(ckpt, eval_hook, "pretrain", 1.0);
    learn_rules(ckpt.rules, data.gold, Phase::finetune);
    collect(ckpt, eval_hook, "finetune", ckpt.gamma);
    return ckpt;
  }

  ckpt.gamma = 1.0;
  Corpus gold = data.gold;
  Corpus aug = data.augmented;
  if (recipe.mode == RecipeMode::ST_up) gold = up_sample(gold, aug);
  if (recipe.mode == RecipeMode::ST_down) aug = down_sample(aug, gold, recipe.seed);
  learn_rules(ckpt.rules, gold, Phase::finetune);
  learn_rules(ckpt.rules, aug, Phase::finetune);
  collect(ckpt, eval_hook, "pooled", ckpt.gamma);
  return ckpt;
}

ModelCheckpoint run_recipe(const TrainingRecipe& recipe, const std::filesystem::path& base_dir,
                           const EvalHook& eval_hook) {
  validate_manifest(recipe.manifest);
  return run_recipe(recipe, load_training_data(recipe.manifest, base_dir), eval_hook);
}

TrainingRecipe load_recipe(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open recipe '" + path.string() + "'");
  TrainingRecipe r;
  try {
    auto j = json::parse(in);
    r.mode = parse_recipe_mode(j.at("mode").get<std::string>());
    r.manifest_path = j.at("manifest").get<std::string>();
    std::filesystem::path mp = r.manifest_path;
    if (mp.is_relative()) mp = path.parent_path() / mp;
    r.manifest = load_manifest(mp);
    if (j.contains("phases")) {
      const auto& ph = j.at("phases");
      if (ph.contains("pretrain")) r.pretrain_phase = phase_from_json(ph.at("pretrain"));
      if (ph.contains("finetune")) r.finetune_phase = phase_from_json(ph.at("finetune"));
    }
    r.gamma = j.value("gamma", 0.1);
    r.seed = j.value("seed", std::uint64_t{1});
    r.rule_options.max_ngram = j.value("max_ngram", std::size_t{3});
    r.rule_options.left_context = j.value("left_context", false);
  } catch (const json::exception& e) {
    throw DataError("recipe '" + path.string() + "': " + e.what());
  }
  return r;
}

void save_recipe(const TrainingRecipe& recipe, const std::filesystem::path& path) {
  json j = {{"mode", to_string(recipe.mode)},
            {"manifest", recipe.manifest_path},
            {"phases", {{"pretrain", phase_json(recipe.pretrain_phase)},
                        {"finetune", phase_json(recipe.finetune_phase)}}},
            {"gamma", recipe.gamma},
            {"seed", recipe.seed},
            {"max_ngram", recipe.rule_options.max_ngram},
            {"left_context", recipe.rule_options.left_context}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  json rules = json::array();
  for (const auto& [key, entry] : ckpt.rules.entries()) {
    json edits = json::object();
    for (const auto& [target, c] : entry.edits) edits[target] = {c.pretrain, c.finetune};
    rules.push_back({{"context", key.context},
                     {"source", key.source},
                     {"keep", {entry.keep.pretrain, entry.keep.finetune}},
                     {"edits", edits}});
  }
  json j = {{"format", "seqaug-checkpoint"},
            {"version", 1},
            {"mode", to_string(ckpt.mode)},
            {"gamma", ckpt.gamma},
            {"fingerprint", ckpt.fingerprint},
            {"metrics", ckpt.metrics},
            {"max_ngram", ckpt.rules.options().max_ngram},
            {"left_context", ckpt.rules.options().left_context},
            {"rules", rules}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out << j.dump() << '\n';
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  ModelCheckpoint ckpt;
  try {
    auto j = json::parse(in);
    if (j.value("format", std::string()) != "seqaug-checkpoint" || j.value("version", 0) != 1)
      throw DataError("not a seqaug v1 checkpoint");
    ckpt.mode = parse_recipe_mode(j.at("mode").get<std::string>());
    ckpt.gamma = j.at("gamma").get<double>();
    ckpt.fingerprint = j.at("fingerprint").get<std::string>();
    ckpt.metrics = j.at("metrics").get<std::map<std::string, double>>();
    RuleOptions opts{j.at("max_ngram").get<std::size_t>(), j.at("left_context").get<bool>()};
    ckpt.rules = RuleTable(opts);
    for (const auto& r : j.at("rules")) {
      RuleKey key{r.at("context").get<std::string>(), r.at("source").get<std::string>()};
      auto keep = r.at("keep");
      ckpt.rules.add_keep(key, Phase::pretrain, keep.at(0).get<double>());
      ckpt.rules.add_keep(key, Phase::finetune, keep.at(1).get<double>());
      for (const auto& [target, c] : r.at("edits").items()) {
        ckpt.rules.add_edit(key, target, Phase::pretrain, c.at(0).get<double>());
        ckpt.rules.add_edit(key, target, Phase::finetune, c.at(1).get<double>());
      }
    }
  } catch (const json::exception& e) {
    throw DataError("checkpoint '" + path.string() + "': " + e.what());
  }
  return ckpt;
}

}  // namespace seqaug
