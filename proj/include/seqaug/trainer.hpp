#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "seqaug/augmentor.hpp"
#include "seqaug/rewriter.hpp"

namespace seqaug {

/// Optimisation settings of one training phase. Only the schedule is consumed by
/// the count model; dropout is carried for gradient-based trainers.
struct PhaseConfig {
  double lr_base = 0.0005;
  long warmup_steps = 8000;
  long total_steps = 200000;
  double dropout = 0.3;

  void validate() const;
  bool operator==(const PhaseConfig&) const = default;
};

namespace presets {
inline constexpr PhaseConfig gec_pretrain{0.0005, 8000, 200000, 0.3};
inline constexpr PhaseConfig gec_finetune{0.0001, 4000, 50000, 0.2};
inline constexpr PhaseConfig fst_pretrain{0.0005, 8000, 80000, 0.1};
// warmup is not published for FST fine-tuning; 4000 mirrors the GEC fine-tune phase
inline constexpr PhaseConfig fst_finetune{0.00025, 4000, 15000, 0.1};
}  // namespace presets

/// Looks up "gec-pretrain", "gec-finetune", "fst-pretrain" or "fst-finetune".
std::optional<PhaseConfig> phase_preset(const std::string& name);

/// Linear warmup then inverse square-root decay:
/// lr_base * min(step / warmup, sqrt(warmup / step)). Throws for step < 1.
double lr_at(const PhaseConfig& cfg, long step);

enum class RecipeMode { ST, ST_up, ST_down, PTFT };
std::string to_string(RecipeMode mode);
RecipeMode parse_recipe_mode(const std::string& text);

struct TrainingRecipe {
  RecipeMode mode = RecipeMode::PTFT;
  DataManifest manifest;
  std::string manifest_path;  // informational; kept in the recipe file
  PhaseConfig pretrain_phase = presets::gec_pretrain;
  PhaseConfig finetune_phase = presets::gec_finetune;
  double gamma = 0.1;
  std::uint64_t seed = 1;
  RuleOptions rule_options;
};

/// Stable hash of the recipe settings and slice checksums.
std::string recipe_fingerprint(const TrainingRecipe& recipe);

struct ModelCheckpoint {
  RuleTable rules;
  RecipeMode mode = RecipeMode::PTFT;
  double gamma = 1.0;  // blend used at decode time (1 for simultaneous training)
  std::string fingerprint;
  std::map<std::string, double> metrics;

  BlendConfig blend(double alpha = 0.1) const { return {gamma, alpha}; }
  bool operator==(const ModelCheckpoint&) const = default;
};

/// Called after each phase with its name ("pretrain", "finetune" or "pooled").
/// Returned metrics are stored in the checkpoint under "<phase>.<name>".
using EvalHook = std::function<std::map<std::string, double>(const std::string& phase,
                                                              const RuleTable& rules,
                                                              double gamma)>;

/// ST pools gold and augmented counts in one register; ST_up / ST_down first
/// up-sample gold or down-sample augmented data. PTFT counts augmented data in
/// the pre-train register and gold data in the fine-tune register.
ModelCheckpoint run_recipe(const TrainingRecipe& recipe, const TrainingData& data,
                           const EvalHook& eval_hook = {});
/// Loads the slices named by the manifest (relative to base_dir) before training.
ModelCheckpoint run_recipe(const TrainingRecipe& recipe, const std::filesystem::path& base_dir,
                           const EvalHook& eval_hook = {});

TrainingRecipe load_recipe(const std::filesystem::path& path);
void save_recipe(const TrainingRecipe& recipe, const std::filesystem::path& path);

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace seqaug
