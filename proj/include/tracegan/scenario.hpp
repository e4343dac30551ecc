#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tracegan/corpus.hpp"
#include "tracegan/evaluation.hpp"
#include "tracegan/nets.hpp"
#include "tracegan/training.hpp"

namespace tracegan {

// ---------------------------------------------------------------------------
// plans

enum class ScenarioName { Perfect, DataMismatch, DataParamMismatch, DataArchMismatch };

std::string scenario_name_str(ScenarioName n);
ScenarioName parse_scenario_name(const std::string& s);

struct EnsembleMemberSpec {
  Architecture arch = Architecture::ConstrainedFront;
  ClassDefinition class_def = ClassDefinition::Detection;
  std::string split = "A";                     // training split ("I" or "A")
  std::vector<ManipulationSpec> param_subset;  // empty: inherit the plan's subset
};

struct ScenarioPlan {
  int schema_version = 1;
  ScenarioName name = ScenarioName::Perfect;
  std::string attacker_split = "I";
  std::string victim_split = "I";
  Architecture victim_arch = Architecture::ConstrainedFront;
  ClassDefinition victim_class_def = ClassDefinition::Detection;
  std::vector<EnsembleMemberSpec> ensemble;
  std::vector<ManipulationSpec> param_subset;       // attacker's known set; empty: full table
  std::vector<ManipulationSpec> eval_param_subset;  // empty: evaluate on everything
};

nlohmann::json plan_to_json(const ScenarioPlan& plan);
ScenarioPlan plan_from_json(const nlohmann::json& j);
void save_plan(const ScenarioPlan& plan, const std::filesystem::path& file);
ScenarioPlan load_plan(const std::filesystem::path& file);
std::string plan_hash(const ScenarioPlan& plan);

// Checks the knowledge-scenario invariants against the investigator's full
// manipulation table. Violations are returned as data, one string per broken
// rule; an empty list means the plan is valid.
std::vector<std::string> validate_plan(const ScenarioPlan& plan, const ManipulationTable& table);

// ---------------------------------------------------------------------------
// ablation arms

struct ScenarioArm {
  std::string name;    // "base", "no_discriminator", ...
  ScenarioPlan plan;
  bool gamma_zero = false;  // discriminator removed
  bool unpaired = false;    // pixel-to-pixel correspondence disabled
};

// base plan plus the four ablation variants, each differing in one field
std::vector<ScenarioArm> ablation_arms(const ScenarioPlan& base);

// ---------------------------------------------------------------------------
// end-to-end runs

struct RunConfig {
  int patch_size = 256;
  ManipulationTable table = ManipulationTable::standard();
  int surrogate_width = 32;
  int surrogate_fc = 200;
  GeneratorCfg generator;
  DiscriminatorCfg discriminator;
  SurrogateTrainCfg surrogate_train;
  GanTrainCfg gan;
  int train_patches_per_image = 2;
  int holdout_images = 8;   // images carved from each training split for hold-out accuracy
  int eval_patches = 64;    // manipulated eval patches attacked per run
  std::uint64_t split_seed = 1;
  bool reuse_checkpoints = true;

  // mirrors the reported protocol (256px patches, full widths, 43/12 epochs)
  static RunConfig paper_profile();
  // shrunk so a full scenario finishes in minutes on a laptop CPU
  static RunConfig desk_profile();
};

nlohmann::json run_config_to_json(const RunConfig& cfg);
std::string run_config_hash(const RunConfig& cfg);

struct ScenarioOutcome {
  std::vector<AttackReport> reports;
  std::string run_id;
  std::filesystem::path run_dir;
  bool loaded_from_cache = false;
};

// Validates the plan, trains (or loads) surrogates and victim, trains the
// attack, attacks eval-set manipulated patches through the PNG round-trip,
// classifies them with the victim and persists reports plus artifacts under
// run_root. Deterministic for a fixed (plan, config, seed).
ScenarioOutcome run_scenario(const ScenarioPlan& plan, const RunConfig& cfg,
                             const ImageProvider& provider,
                             const std::filesystem::path& run_root, std::uint64_t seed,
                             bool gamma_zero = false, bool unpaired = false);

ScenarioOutcome run_arm(const ScenarioArm& arm, const RunConfig& cfg,
                        const ImageProvider& provider, const std::filesystem::path& run_root,
                        std::uint64_t seed);

}  // namespace tracegan
