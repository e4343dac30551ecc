#include "tracegan/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tracegan/attack.hpp"
#include "tracegan/checkpoint.hpp"
#include "tracegan/hashing.hpp"
#include "tracegan/rng.hpp"

namespace tracegan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// plan (de)serialization

std::string scenario_name_str(ScenarioName n) {
  switch (n) {
    case ScenarioName::Perfect: return "perfect";
    case ScenarioName::DataMismatch: return "data_mismatch";
    case ScenarioName::DataParamMismatch: return "data_param_mismatch";
    case ScenarioName::DataArchMismatch: return "data_arch_mismatch";
  }
  throw std::logic_error("bad ScenarioName");
}

ScenarioName parse_scenario_name(const std::string& s) {
  for (ScenarioName n : {ScenarioName::Perfect, ScenarioName::DataMismatch,
                         ScenarioName::DataParamMismatch, ScenarioName::DataArchMismatch})
    if (scenario_name_str(n) == s) return n;
  throw std::invalid_argument("unknown scenario name: " + s);
}

namespace {
json specs_to_json(const std::vector<ManipulationSpec>& specs) {
  json arr = json::array();
  for (const auto& s : specs) arr.push_back(s.id());
  return arr;
}

std::vector<ManipulationSpec> specs_from_json(const json& arr) {
  std::vector<ManipulationSpec> out;
  for (const auto& e : arr) out.push_back(ManipulationSpec::parse(e.get<std::string>()));
  return out;
}
}  // namespace

json plan_to_json(const ScenarioPlan& plan) {
  json members = json::array();
  for (const auto& m : plan.ensemble) {
    json e{{"architecture", architecture_name(m.arch)},
           {"class_def", class_def_name(m.class_def)},
           {"split", m.split}};
    if (!m.param_subset.empty()) e["param_subset"] = specs_to_json(m.param_subset);
    members.push_back(e);
  }
  json j{{"schema_version", plan.schema_version},
         {"name", scenario_name_str(plan.name)},
         {"attacker_split", plan.attacker_split},
         {"victim_split", plan.victim_split},
         {"victim",
          {{"architecture", architecture_name(plan.victim_arch)},
           {"class_def", class_def_name(plan.victim_class_def)}}},
         {"ensemble", members}};
  if (!plan.param_subset.empty()) j["param_subset"] = specs_to_json(plan.param_subset);
  if (!plan.eval_param_subset.empty())
    j["eval_param_subset"] = specs_to_json(plan.eval_param_subset);
  return j;
}

ScenarioPlan plan_from_json(const json& j) {
  ScenarioPlan plan;
  plan.schema_version = j.at("schema_version").get<int>();
  if (plan.schema_version != 1)
    throw std::invalid_argument("unsupported plan schema_version " +
                                std::to_string(plan.schema_version));
  plan.name = parse_scenario_name(j.at("name").get<std::string>());
  plan.attacker_split = j.at("attacker_split").get<std::string>();
  plan.victim_split = j.at("victim_split").get<std::string>();
  plan.victim_arch = parse_architecture(j.at("victim").at("architecture").get<std::string>());
  plan.victim_class_def = parse_class_def(j.at("victim").at("class_def").get<std::string>());
  for (const auto& e : j.at("ensemble")) {
    EnsembleMemberSpec m;
    m.arch = parse_architecture(e.at("architecture").get<std::string>());
    m.class_def = parse_class_def(e.at("class_def").get<std::string>());
    m.split = e.at("split").get<std::string>();
    if (e.contains("param_subset")) m.param_subset = specs_from_json(e.at("param_subset"));
    plan.ensemble.push_back(std::move(m));
  }
  if (j.contains("param_subset")) plan.param_subset = specs_from_json(j.at("param_subset"));
  if (j.contains("eval_param_subset"))
    plan.eval_param_subset = specs_from_json(j.at("eval_param_subset"));
  return plan;
}

void save_plan(const ScenarioPlan& plan, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write plan: " + file.string());
  out << plan_to_json(plan).dump(2) << "\n";
}

ScenarioPlan load_plan(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read plan: " + file.string());
  return plan_from_json(json::parse(in));
}

std::string plan_hash(const ScenarioPlan& plan) {
  return hash_hex(fnv1a(plan_to_json(plan).dump()));
}

// ---------------------------------------------------------------------------
// validation

namespace {

bool member_matches_victim(const EnsembleMemberSpec& m, const ScenarioPlan& plan) {
  return m.arch == plan.victim_arch && m.class_def == plan.victim_class_def &&
         m.split == plan.victim_split;
}

bool subset_of_table(const std::vector<ManipulationSpec>& specs, const ManipulationTable& table) {
  return std::all_of(specs.begin(), specs.end(),
                     [&](const ManipulationSpec& s) { return table.contains(s); });
}

}  // namespace

std::vector<std::string> validate_plan(const ScenarioPlan& plan, const ManipulationTable& table) {
  std::vector<std::string> violations;
  auto bad = [&](const std::string& rule) { violations.push_back(rule); };

  if (plan.ensemble.empty()) bad("ensemble is empty");
  for (const std::string& split : {plan.attacker_split, plan.victim_split})
    if (split != "I" && split != "A") bad("unknown split name '" + split + "'");
  for (const auto& m : plan.ensemble)
    if (m.split != "I" && m.split != "A") bad("ensemble member has unknown split '" + m.split + "'");
  if (!subset_of_table(plan.param_subset, table))
    bad("param_subset contains specs outside the configured table");
  if (!subset_of_table(plan.eval_param_subset, table))
    bad("eval_param_subset contains specs outside the configured table");
  for (const auto& m : plan.ensemble)
    if (!subset_of_table(m.param_subset, table))
      bad("ensemble member param_subset contains specs outside the configured table");

  const bool victim_in_ensemble = std::any_of(
      plan.ensemble.begin(), plan.ensemble.end(),
      [&](const EnsembleMemberSpec& m) { return member_matches_victim(m, plan); });
  const bool victim_arch_present =
      std::any_of(plan.ensemble.begin(), plan.ensemble.end(),
                  [&](const EnsembleMemberSpec& m) { return m.arch == plan.victim_arch; });
  const bool params_restricted =
      !plan.param_subset.empty() && plan.param_subset.size() < table.size();

  switch (plan.name) {
    case ScenarioName::Perfect:
      if (plan.attacker_split != plan.victim_split)
        bad("perfect: attacker_split must equal victim_split");
      if (!victim_in_ensemble) bad("perfect: victim net must be in the ensemble");
      if (params_restricted) bad("perfect: manipulation parameters must match the full table");
      break;
    case ScenarioName::DataMismatch:
      if (plan.attacker_split == plan.victim_split)
        bad("data_mismatch: attacker_split must differ from victim_split");
      if (!victim_arch_present)
        bad("data_mismatch: victim architecture must be present in the ensemble");
      if (victim_in_ensemble) bad("data_mismatch: the victim net itself must be absent");
      if (params_restricted)
        bad("data_mismatch: manipulation parameters must match the full table");
      break;
    case ScenarioName::DataParamMismatch:
      if (plan.attacker_split == plan.victim_split)
        bad("data_param_mismatch: attacker_split must differ from victim_split");
      if (!victim_arch_present)
        bad("data_param_mismatch: victim architecture must be present in the ensemble");
      if (victim_in_ensemble) bad("data_param_mismatch: the victim net itself must be absent");
      if (!params_restricted)
        bad("data_param_mismatch: param_subset must be a strict subset of the table");
      break;
    case ScenarioName::DataArchMismatch:
      if (plan.attacker_split == plan.victim_split)
        bad("data_arch_mismatch: attacker_split must differ from victim_split");
      if (victim_arch_present)
        bad("data_arch_mismatch: arch overlap - ensemble contains the victim architecture");
      if (params_restricted)
        bad("data_arch_mismatch: manipulation parameters must match the full table");
      break;
  }
  return violations;
}

// ---------------------------------------------------------------------------
// ablation arms

std::vector<ScenarioArm> ablation_arms(const ScenarioPlan& base) {
  std::vector<ScenarioArm> arms;
  arms.push_back({"base", base, false, false});
  arms.push_back({"no_discriminator", base, true, false});

  {  // one-architecture ensemble, victim's architecture when available
    ScenarioPlan plan = base;
    Architecture keep = base.ensemble.empty() ? base.victim_arch : base.ensemble.front().arch;
    for (const auto& m : base.ensemble)
      if (m.arch == base.victim_arch) {
        keep = m.arch;
        break;
      }
    plan.ensemble.clear();
    for (const auto& m : base.ensemble)
      if (m.arch == keep) plan.ensemble.push_back(m);
    arms.push_back({"single_architecture", plan, false, false});
  }

  arms.push_back({"unpaired", base, false, true});

  {  // MISLGAN-style: one surrogate, matching the victim when possible
    ScenarioPlan plan = base;
    const EnsembleMemberSpec* pick = nullptr;
    for (const auto& m : base.ensemble)
      if (m.arch == base.victim_arch && m.class_def == base.victim_class_def) pick = &m;
    if (!pick)
      for (const auto& m : base.ensemble)
        if (m.arch == base.victim_arch) pick = &m;
    if (!pick && !base.ensemble.empty()) pick = &base.ensemble.front();
    plan.ensemble.clear();
    if (pick) plan.ensemble.push_back(*pick);
    arms.push_back({"single_surrogate", plan, false, false});
  }
  return arms;
}

// ---------------------------------------------------------------------------
// run config

RunConfig RunConfig::paper_profile() {
  RunConfig cfg;
  cfg.patch_size = 256;
  cfg.table = ManipulationTable::standard();
  cfg.surrogate_width = 32;
  cfg.surrogate_fc = 200;
  cfg.generator = GeneratorCfg{64, 128};
  cfg.discriminator = DiscriminatorCfg{};
  cfg.discriminator.input_size = 256;
  cfg.surrogate_train = SurrogateTrainCfg{};  // 43 epochs, batch 25, lr 5e-4
  cfg.gan = GanTrainCfg{};                    // 12 epochs, lr 1e-4
  cfg.train_patches_per_image = 2;
  cfg.holdout_images = 16;
  cfg.eval_patches = 256;
  return cfg;
}

RunConfig RunConfig::desk_profile() {
  RunConfig cfg;
  cfg.patch_size = 32;
  cfg.table = ManipulationTable({{ManipKind::Awgn, 1.5},
                                 {ManipKind::Awgn, 2.5},
                                 {ManipKind::MedianFilter, 3},
                                 {ManipKind::MedianFilter, 5}});
  cfg.surrogate_width = 8;
  cfg.surrogate_fc = 24;
  cfg.generator = GeneratorCfg{12, 24};
  cfg.discriminator = DiscriminatorCfg{32, 3, {8, 8, 16, 16}, 32, 16};
  cfg.surrogate_train = SurrogateTrainCfg{};
  cfg.surrogate_train.epochs = 14;
  cfg.surrogate_train.batch = 25;
  cfg.surrogate_train.lr0 = 0.01;
  cfg.gan = GanTrainCfg{};
  cfg.gan.epochs = 4;
  cfg.gan.batch = 10;
  cfg.gan.steps_per_epoch = 60;
  cfg.gan.lr0 = 0.001;
  cfg.train_patches_per_image = 2;
  cfg.holdout_images = 8;
  cfg.eval_patches = 64;
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  json specs = json::array();
  for (const auto& s : cfg.table.specs()) specs.push_back(s.id());
  json j;
  j["patch_size"] = cfg.patch_size;
  j["table"] = specs;
  j["surrogate_width"] = cfg.surrogate_width;
  j["surrogate_fc"] = cfg.surrogate_fc;
  j["generator"] = cfg.generator;
  j["discriminator"] = cfg.discriminator;
  j["surrogate_train"] = {{"epochs", cfg.surrogate_train.epochs},
                          {"batch", cfg.surrogate_train.batch},
                          {"lr0", cfg.surrogate_train.lr0},
                          {"patience", cfg.surrogate_train.early_stop_patience},
                          {"max_steps_per_epoch", cfg.surrogate_train.max_steps_per_epoch}};
  j["gan"] = {{"epochs", cfg.gan.epochs},
              {"batch", cfg.gan.batch},
              {"steps_per_epoch", cfg.gan.steps_per_epoch},
              {"lr0", cfg.gan.lr0},
              {"alpha", cfg.gan.weights.alpha},
              {"gamma", cfg.gan.weights.gamma},
              {"nonsaturating", cfg.gan.nonsaturating_adversarial}};
  j["train_patches_per_image"] = cfg.train_patches_per_image;
  j["holdout_images"] = cfg.holdout_images;
  j["eval_patches"] = cfg.eval_patches;
  j["split_seed"] = cfg.split_seed;
  return j;
}

std::string run_config_hash(const RunConfig& cfg) {
  return hash_hex(fnv1a(run_config_to_json(cfg).dump()));
}

// ---------------------------------------------------------------------------
// end-to-end run

namespace {

struct EvalItem {
  ImageBuffer manipulated_rt;  // PNG round-tripped manipulated patch
  ImageBuffer attacked_rt;     // PNG round-tripped attacked patch
};

ManipulationTable attacker_table(const ScenarioPlan& plan, const RunConfig& cfg) {
  return plan.param_subset.empty() ? cfg.table : cfg.table.only(plan.param_subset);
}

std::string member_key(const EnsembleMemberSpec& m) {
  std::string key = architecture_name(m.arch) + "-" + class_def_name(m.class_def) + "-" + m.split;
  for (const auto& s : m.param_subset) key += "-" + s.id();
  return key;
}

// carve a deterministic holdout block off the front of the id list
void split_holdout(const std::vector<std::string>& ids, int holdout_images,
                   std::vector<std::string>& train_ids, std::vector<std::string>& holdout_ids) {
  const std::size_t h =
      std::min<std::size_t>(std::max(1, holdout_images), ids.size() > 1 ? ids.size() / 4 : 0);
  holdout_ids.assign(ids.begin(), ids.begin() + h);
  train_ids.assign(ids.begin() + h, ids.end());
  if (train_ids.empty()) train_ids = ids;
}

std::unique_ptr<Surrogate> train_or_load_member(
    const ImageProvider& provider, const DatasetSplit& split, const RunConfig& cfg,
    const ScenarioPlan& plan, const EnsembleMemberSpec& m, const std::filesystem::path& cache_dir,
    std::uint64_t seed, std::vector<std::pair<std::string, std::string>>& ckpt_hashes) {
  // nets trained on the investigator's split know the full table; the
  // attacker's own members only know the plan's parameter subset
  ManipulationTable base =
      m.split == plan.victim_split ? cfg.table : attacker_table(plan, cfg);
  const ManipulationTable table = m.param_subset.empty() ? base : cfg.table.only(m.param_subset);

  SurrogateCfg scfg;
  scfg.arch = m.arch;
  scfg.class_def = m.class_def;
  scfg.num_classes = class_count(m.class_def, table);
  scfg.input_size = cfg.patch_size;
  scfg.width = cfg.surrogate_width;
  scfg.fc = cfg.surrogate_fc;

  // scale the profile's batch and rate by the architecture's reported ratios
  // (the highpass-front member trains at 2x batch, 2x rate, iteration decay)
  SurrogateTrainCfg tcfg = cfg.surrogate_train;
  {
    const SurrogateTrainCfg arch_default = default_surrogate_cfg(m.arch);
    const SurrogateTrainCfg base_default;
    tcfg.batch = tcfg.batch * arch_default.batch / base_default.batch;
    tcfg.lr0 = tcfg.lr0 * (arch_default.lr0 / base_default.lr0);
    tcfg.schedule = arch_default.schedule;
  }

  const std::uint64_t member_seed = derive_seed(seed, "surrogate:" + member_key(m));
  json key;
  key["cfg"] = scfg;
  key["train"] = {{"epochs", tcfg.epochs}, {"batch", tcfg.batch}, {"lr0", tcfg.lr0}};
  json tspecs = json::array();
  for (const auto& s : table.specs()) tspecs.push_back(s.id());
  key["table"] = tspecs;
  key["split"] = m.split;
  key["seed"] = member_seed;
  key["ppi"] = cfg.train_patches_per_image;
  const std::string cfg_hash = hash_hex(fnv1a(key.dump()));
  const std::filesystem::path ckpt = cache_dir / ("surrogate-" + cfg_hash + ".ckpt");

  if (cfg.reuse_checkpoints && std::filesystem::exists(ckpt)) {
    auto net = load_surrogate(ckpt);
    ckpt_hashes.emplace_back(member_key(m), hash_hex(net->net().param_hash()));
    return net;
  }

  std::vector<std::string> train_ids, holdout_ids;
  split_holdout(split.ids_of(m.split), cfg.holdout_images, train_ids, holdout_ids);
  const LabeledPatchSet train_set =
      build_labeled_patches(provider, train_ids, table, m.class_def, cfg.patch_size,
                            cfg.train_patches_per_image, derive_seed(member_seed, "train"));
  LabeledPatchSet holdout_set;
  holdout_set.num_classes = train_set.num_classes;
  if (!holdout_ids.empty())
    holdout_set =
        build_labeled_patches(provider, holdout_ids, table, m.class_def, cfg.patch_size,
                              cfg.train_patches_per_image, derive_seed(member_seed, "holdout"));

  auto net = std::make_unique<Surrogate>(scfg, derive_seed(member_seed, "init"));
  train_surrogate(*net, train_set, holdout_set, tcfg, derive_seed(member_seed, "steps"));
  save_surrogate(*net, ckpt, cfg_hash);
  ckpt_hashes.emplace_back(member_key(m), hash_hex(net->net().param_hash()));
  return net;
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioPlan& plan, const RunConfig& cfg,
                             const ImageProvider& provider,
                             const std::filesystem::path& run_root, std::uint64_t seed,
                             bool gamma_zero, bool unpaired) {
  const std::vector<std::string> violations = validate_plan(plan, cfg.table);
  if (!violations.empty()) {
    std::string msg = "invalid plan:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw std::invalid_argument(msg);
  }

  json run_key;
  run_key["plan"] = plan_to_json(plan);
  run_key["config"] = run_config_to_json(cfg);
  run_key["seed"] = seed;
  run_key["gamma_zero"] = gamma_zero;
  run_key["unpaired"] = unpaired;
  const std::string run_id = hash_hex(fnv1a(run_key.dump()));

  ScenarioOutcome outcome;
  outcome.run_id = run_id;
  outcome.run_dir = run_root / ("run-" + run_id);
  const std::filesystem::path reports_file = outcome.run_dir / "reports.json";
  if (cfg.reuse_checkpoints && std::filesystem::exists(reports_file)) {
    outcome.reports = load_reports_json(reports_file);
    outcome.loaded_from_cache = true;
    return outcome;
  }
  std::filesystem::create_directories(outcome.run_dir);
  {
    std::ofstream cfg_out(outcome.run_dir / "run_config.json");
    cfg_out << run_key.dump(2) << "\n";
  }

  const DatasetSplit split = split_dataset(provider.ids(), cfg.split_seed);
  save_split_manifest(split, outcome.run_dir / "split_manifest.json");

  const std::filesystem::path cache_dir = run_root / "cache";
  std::filesystem::create_directories(cache_dir);
  std::vector<std::pair<std::string, std::string>> ckpt_hashes;

  // victim: investigator's net, full table, victim split
  EnsembleMemberSpec victim_spec{plan.victim_arch, plan.victim_class_def, plan.victim_split, {}};
  auto victim = train_or_load_member(provider, split, cfg, plan, victim_spec, cache_dir,
                                     derive_seed(cfg.split_seed, "victim"), ckpt_hashes);
  ckpt_hashes.back().first = "victim";

  // ensemble members
  SurrogateEnsemble ensemble;
  std::vector<std::unique_ptr<Surrogate>> members;
  for (const auto& m : plan.ensemble) {
    // the perfect-knowledge attacker reuses the victim net itself
    if (plan.name == ScenarioName::Perfect && member_matches_victim(m, plan)) {
      ensemble.members.push_back(victim.get());
      continue;
    }
    members.push_back(train_or_load_member(provider, split, cfg, plan, m, cache_dir,
                                           derive_seed(cfg.split_seed, "member"), ckpt_hashes));
    ensemble.members.push_back(members.back().get());
  }

  // attack training
  const ManipulationTable atk_table = attacker_table(plan, cfg);
  GanTrainCfg gan_cfg = cfg.gan;
  if (gamma_zero) gan_cfg.weights.gamma = 0.0;
  if (unpaired) gan_cfg.perceptual_target_input = true;

  Generator generator(cfg.generator, derive_seed(seed, "generator-init"));
  DiscriminatorCfg dcfg = cfg.discriminator;
  dcfg.input_size = cfg.patch_size;
  Discriminator discriminator(dcfg, derive_seed(seed, "discriminator-init"));

  CorpusBatchSource source(provider, split.ids_of(plan.attacker_split), atk_table,
                           atk_table.specs(), cfg.patch_size, !unpaired);
  std::ofstream metrics(outcome.run_dir / "metrics.csv");
  train_attack(generator, discriminator, ensemble, source, gan_cfg, derive_seed(seed, "attack"),
               &metrics, outcome.run_dir, run_id);
  ckpt_hashes.emplace_back("generator", hash_hex(generator.net().param_hash()));

  // evaluation on the eval split through the PNG round-trip
  const ManipulationTable eval_table =
      plan.eval_param_subset.empty() ? cfg.table : cfg.table.only(plan.eval_param_subset);
  Rng eval_rng(derive_seed(cfg.split_seed, "eval"));
  const std::vector<std::string>& eval_ids = split.eval_ids;
  const std::filesystem::path png_dir = outcome.run_dir / "attacked";
  std::filesystem::create_directories(png_dir);

  std::vector<ImageBuffer> before_patches, after_patches;
  std::vector<double> psnrs, ssims;
  for (int i = 0; i < cfg.eval_patches; ++i) {
    const std::string& id = eval_ids[eval_rng.uniform_int(eval_ids.size())];
    ImageBuffer image = provider.load(id);
    auto grid = patch_grid(image.height, image.width, cfg.patch_size);
    if (grid.empty()) throw std::runtime_error("run_scenario: eval image smaller than a patch");
    const PatchOrigin origin = grid[eval_rng.uniform_int(grid.size())];
    const ManipulationSpec spec =
        eval_table.specs()[eval_rng.uniform_int(eval_table.size())];
    ImageBuffer manipulated = apply_manipulation(image, spec, eval_rng.next_u64());
    ImageBuffer patch = crop(manipulated, origin.row, origin.col, cfg.patch_size, cfg.patch_size);

    const std::string stem = "p" + std::to_string(i);
    ImageBuffer manipulated_rt = png_roundtrip(patch, png_dir / (stem + "-manipulated.png"));
    ImageBuffer attacked = attack_patch(generator, manipulated_rt);
    ImageBuffer attacked_rt = png_roundtrip(attacked, png_dir / (stem + "-attacked.png"));

    psnrs.push_back(psnr(attacked_rt, manipulated_rt));
    ssims.push_back(ssim(attacked_rt, manipulated_rt));
    before_patches.push_back(std::move(manipulated_rt));
    after_patches.push_back(std::move(attacked_rt));
  }

  for (const auto& p : before_patches)
    if (!is_integral_byte(p)) throw std::logic_error("evaluation consumed a non-round-tripped buffer");
  for (const auto& p : after_patches)
    if (!is_integral_byte(p)) throw std::logic_error("evaluation consumed a non-round-tripped buffer");

  const std::vector<int> before_preds = predict_labels(*victim, before_patches);
  const std::vector<int> after_preds = predict_labels(*victim, after_patches);

  // victim baseline on quantized eval patches (the PNG-equivalent quantization)
  LabeledPatchSet eval_set =
      build_labeled_patches(provider, eval_ids, cfg.table, plan.victim_class_def, cfg.patch_size,
                            cfg.train_patches_per_image, derive_seed(cfg.split_seed, "baseline"));

  AttackReport report;
  report.victim_id = architecture_name(plan.victim_arch);
  report.class_def = plan.victim_class_def;
  report.asr = attack_success_rate(after_preds, kUnalteredLabel);
  report.asr_before = attack_success_rate(before_preds, kUnalteredLabel);
  report.baseline_accuracy = baseline_accuracy(*victim, eval_set);
  const MeanPsnr mp = mean_psnr(psnrs);
  report.mean_psnr = mp.mean;
  report.psnr_excluded = mp.infinite_count;
  double ssim_acc = 0.0;
  for (double s : ssims) ssim_acc += s;
  report.mean_ssim = ssim_acc / static_cast<double>(ssims.size());
  report.n_patches = static_cast<int>(psnrs.size());
  outcome.reports.push_back(report);

  save_reports_json(outcome.reports, reports_file);
  {
    std::ofstream csv(outcome.run_dir / "report.csv");
    csv << render_report(outcome.reports, ReportFormat::Csv);
    std::ofstream txt(outcome.run_dir / "report.txt");
    txt << render_report(outcome.reports, ReportFormat::Text);
  }
  write_metrics_manifest(outcome.run_dir / "manifest.json", run_id, plan_hash(plan), seed,
                         ckpt_hashes, {"report.csv", "report.txt"});
  return outcome;
}

ScenarioOutcome run_arm(const ScenarioArm& arm, const RunConfig& cfg,
                        const ImageProvider& provider, const std::filesystem::path& run_root,
                        std::uint64_t seed) {
  return run_scenario(arm.plan, cfg, provider, run_root, seed, arm.gamma_zero, arm.unpaired);
}

}  // namespace tracegan
