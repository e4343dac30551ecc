// tracegan: corpus preparation, surrogate/attack training, deployment and
// scenario evaluation from one binary. Artifacts land in the chosen output
// directory; logs go to stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tracegan/attack.hpp"
#include "tracegan/checkpoint.hpp"
#include "tracegan/corpus.hpp"
#include "tracegan/evaluation.hpp"
#include "tracegan/hashing.hpp"
#include "tracegan/png_io.hpp"
#include "tracegan/rng.hpp"
#include "tracegan/scenario.hpp"
#include "tracegan/synth.hpp"
#include "tracegan/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tracegan;

namespace {

std::string default_data_root() {
  const char* env = std::getenv("TRACEGAN_DATA_ROOT");
  return env ? env : "";
}

std::vector<ManipulationSpec> parse_spec_list(const std::string& csv) {
  std::vector<ManipulationSpec> specs;
  std::string cur;
  for (char ch : csv + ",") {
    if (ch == ',') {
      if (!cur.empty()) specs.push_back(ManipulationSpec::parse(cur));
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur += ch;
    }
  }
  return specs;
}

ManipulationTable table_from_flags(const std::string& param_set, const std::string& exclude) {
  ManipulationTable table = ManipulationTable::standard();
  if (!param_set.empty()) table = table.only(parse_spec_list(param_set));
  if (!exclude.empty()) table = table.without(parse_spec_list(exclude));
  if (table.size() == 0) throw std::runtime_error("manipulation table is empty");
  return table;
}

void require_artifact(const fs::path& p, const std::string& what) {
  if (!fs::exists(p))
    throw std::runtime_error("missing " + what + ": " + p.string() +
                             " (run the producing command first)");
}

void write_summary(const fs::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_synth(const std::string& out_dir, int count, int height, int width,
              std::uint64_t seed) {
  fs::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img%04d.png", i);
    write_png(synth_image(height, width, derive_seed(seed, static_cast<std::uint64_t>(i))),
              fs::path(out_dir) / name);
  }
  std::cerr << "wrote " << count << " synthetic images to " << out_dir << "\n";
  return 0;
}

int cmd_prepare(const std::string& input_dir, const std::string& out_dir, std::uint64_t seed,
                int patch_size, const std::string& param_set, const std::string& exclude) {
  DirectoryImageProvider provider(input_dir);
  const std::vector<std::string> ids = provider.ids();
  if (ids.size() < 10)
    throw std::runtime_error("prepare: need at least 10 images, found " +
                             std::to_string(ids.size()));
  const ManipulationTable table = table_from_flags(param_set, exclude);

  json cfg;
  cfg["seed"] = seed;
  cfg["patch_size"] = patch_size;
  json specs = json::array();
  for (const auto& s : table.specs()) specs.push_back(s.id());
  cfg["table"] = specs;
  json id_list = json::array();
  for (const auto& id : ids) id_list.push_back(id);
  cfg["inputs"] = id_list;
  const std::string cfg_hash = hash_hex(fnv1a(cfg.dump()));

  const fs::path out(out_dir);
  const fs::path stamp = out / ("prepare-" + cfg_hash + ".done");
  if (fs::exists(stamp)) {
    std::cerr << "prepare: outputs for config " << cfg_hash << " already present, nothing to do\n";
    return 0;
  }
  fs::create_directories(out);

  DatasetSplit split = split_dataset(ids, seed);
  save_split_manifest(split, out / "split_manifest.json");

  json patch_index = json::object();
  for (const auto& id : ids) {
    ImageBuffer image = provider.load(id);
    json origins = json::array();
    for (const PatchOrigin& o : patch_grid(image.height, image.width, patch_size))
      origins.push_back({o.row, o.col});
    patch_index[id] = origins;
    for (const auto& spec : table.specs()) {
      const fs::path dir = out / "manipulated" / spec.id();
      fs::create_directories(dir);
      ImageBuffer manipulated =
          apply_manipulation(image, spec, derive_seed(seed, id + "/" + spec.id()));
      write_png(quantize_bytes(manipulated), dir / (fs::path(id).stem().string() + ".png"));
    }
    std::cerr << "prepared " << id << "\n";
  }
  write_summary(out / "patch_index.json", patch_index);
  cfg["outputs"] = {"split_manifest.json", "patch_index.json", "manipulated/"};
  write_summary(out / "prepare_config.json", cfg);
  std::ofstream(stamp) << cfg_hash << "\n";
  std::cerr << "prepare: done, config " << cfg_hash << "\n";
  return 0;
}

SurrogateCfg surrogate_cfg_from_flags(const std::string& arch, const std::string& class_def,
                                      const ManipulationTable& table, int patch_size, int width,
                                      int fc) {
  SurrogateCfg cfg;
  cfg.arch = parse_architecture(arch);
  cfg.class_def = parse_class_def(class_def);
  cfg.num_classes = class_count(cfg.class_def, table);
  cfg.input_size = patch_size;
  cfg.width = width;
  cfg.fc = fc;
  return cfg;
}

int cmd_train_surrogate(const std::string& corpus_dir, const std::string& manifest,
                        const std::string& arch, const std::string& class_def,
                        const std::string& split_name, const std::string& out_dir,
                        std::uint64_t seed, int patch_size, int width, int fc, int epochs,
                        int ppi, const std::string& param_set, const std::string& exclude,
                        double lr0, int batch) {
  require_artifact(manifest, "split manifest");
  DirectoryImageProvider provider(corpus_dir);
  DatasetSplit split = load_split_manifest(manifest);
  const ManipulationTable table = table_from_flags(param_set, exclude);

  SurrogateCfg scfg = surrogate_cfg_from_flags(arch, class_def, table, patch_size, width, fc);
  SurrogateTrainCfg tcfg = default_surrogate_cfg(scfg.arch);
  tcfg.epochs = epochs;
  if (lr0 > 0) tcfg.lr0 = lr0;
  if (batch > 0) tcfg.batch = batch;

  const std::vector<std::string>& ids = split.ids_of(split_name);
  if (ids.size() < 2) throw std::runtime_error("split " + split_name + " has too few images");
  const std::size_t holdout_n = std::max<std::size_t>(1, ids.size() / 10);
  std::vector<std::string> holdout_ids(ids.begin(), ids.begin() + holdout_n);
  std::vector<std::string> train_ids(ids.begin() + holdout_n, ids.end());

  std::cerr << "building labeled patches (" << table.size() << " specs, " << train_ids.size()
            << " train images)\n";
  LabeledPatchSet train = build_labeled_patches(provider, train_ids, table, scfg.class_def,
                                                patch_size, ppi, derive_seed(seed, "train"));
  LabeledPatchSet holdout = build_labeled_patches(provider, holdout_ids, table, scfg.class_def,
                                                  patch_size, ppi, derive_seed(seed, "holdout"));

  Surrogate net(scfg, derive_seed(seed, "init"));
  std::cerr << "training " << arch << "/" << class_def << " on " << train.patches.size()
            << " patches\n";
  SurrogateTrainResult result = train_surrogate(net, train, holdout, tcfg, seed);

  fs::create_directories(out_dir);
  json cfg_j;
  cfg_j["surrogate"] = scfg;
  cfg_j["seed"] = seed;
  const std::string cfg_hash = hash_hex(fnv1a(cfg_j.dump()));
  const fs::path ckpt = fs::path(out_dir) / (arch + "-" + class_def + "-" + split_name + ".ckpt");
  save_surrogate(net, ckpt, cfg_hash);

  json summary;
  summary["checkpoint"] = ckpt.string();
  summary["holdout_accuracy"] = result.holdout_accuracy;
  summary["epochs_run"] = result.epochs_run;
  summary["steps"] = result.steps;
  summary["stopped_early"] = result.stopped_early;
  summary["param_hash"] = hash_hex(net.net().param_hash());
  write_summary(fs::path(out_dir) / (arch + "-" + class_def + "-" + split_name + ".json"),
                summary);
  std::cerr << "holdout accuracy " << result.holdout_accuracy << ", checkpoint " << ckpt << "\n";
  return 0;
}

int cmd_train_attack(const std::string& corpus_dir, const std::string& manifest,
                     const std::vector<std::string>& ensemble_files,
                     const std::string& split_name, const std::string& out_dir,
                     std::uint64_t seed, int patch_size, int g1, int g2, int epochs, int steps,
                     int batch, bool gamma0, bool unpaired, bool nonsaturating,
                     const std::string& param_set, const std::string& exclude) {
  require_artifact(manifest, "split manifest");
  if (ensemble_files.empty()) throw std::runtime_error("train-attack: ensemble is empty");
  DirectoryImageProvider provider(corpus_dir);
  DatasetSplit split = load_split_manifest(manifest);
  const ManipulationTable table = table_from_flags(param_set, exclude);

  std::vector<std::unique_ptr<Surrogate>> members;
  SurrogateEnsemble ensemble;
  for (const auto& f : ensemble_files) {
    require_artifact(f, "surrogate checkpoint");
    members.push_back(load_surrogate(f));
    if (members.back()->cfg().input_size != patch_size)
      throw std::runtime_error("surrogate " + f + " expects input size " +
                               std::to_string(members.back()->cfg().input_size));
    ensemble.members.push_back(members.back().get());
  }

  GanTrainCfg cfg;
  cfg.epochs = epochs;
  cfg.steps_per_epoch = steps;
  cfg.batch = batch;
  cfg.nonsaturating_adversarial = nonsaturating;
  if (gamma0) cfg.weights.gamma = 0.0;
  cfg.perceptual_target_input = unpaired;

  Generator generator(GeneratorCfg{g1, g2}, derive_seed(seed, "generator-init"));
  DiscriminatorCfg dcfg = RunConfig::desk_profile().discriminator;
  dcfg.input_size = patch_size;
  Discriminator discriminator(dcfg, derive_seed(seed, "discriminator-init"));

  CorpusBatchSource source(provider, split.ids_of(split_name), table, table.specs(), patch_size,
                           !unpaired);
  fs::create_directories(out_dir);
  std::ofstream metrics(fs::path(out_dir) / "metrics.csv");
  json cfg_j;
  cfg_j["generator"] = generator.cfg();
  cfg_j["seed"] = seed;
  const std::string cfg_hash = hash_hex(fnv1a(cfg_j.dump()));

  std::cerr << "training attack for " << epochs << " epochs x " << steps << " steps\n";
  GanTrainResult result = train_attack(generator, discriminator, ensemble, source, cfg, seed,
                                       &metrics, out_dir, cfg_hash);

  const fs::path ckpt = fs::path(out_dir) / "generator.ckpt";
  save_generator(generator, ckpt, cfg_hash);
  json summary;
  summary["checkpoint"] = ckpt.string();
  summary["steps"] = result.steps;
  summary["final_generator_loss"] = result.last_step.generator_total;
  summary["param_hash"] = hash_hex(generator.net().param_hash());
  write_summary(fs::path(out_dir) / "train_attack.json", summary);
  std::cerr << "generator saved to " << ckpt << "\n";
  return 0;
}

int cmd_attack(const std::string& generator_file, const std::string& input,
               const std::string& output, int patch_size) {
  require_artifact(generator_file, "generator checkpoint");
  require_artifact(input, "input image");
  auto generator = load_generator(generator_file);
  ImageBuffer image = read_image(input);
  ImageBuffer attacked = attack_full_image(*generator, image, patch_size);
  if (fs::path(output).has_parent_path()) fs::create_directories(fs::path(output).parent_path());
  write_png(quantize_bytes(attacked), output);
  std::cerr << "attacked " << input << " (" << image.height << "x" << image.width << ") -> "
            << output << "\n";
  return 0;
}

int cmd_eval(const std::string& corpus_dir, const std::string& manifest,
             const std::string& victim_file, const std::string& generator_file,
             const std::string& out_dir, std::uint64_t seed, int patches,
             const std::string& param_set, const std::string& exclude) {
  require_artifact(manifest, "split manifest");
  require_artifact(victim_file, "victim checkpoint");
  DirectoryImageProvider provider(corpus_dir);
  DatasetSplit split = load_split_manifest(manifest);
  auto victim = load_surrogate(victim_file);
  const int patch_size = victim->cfg().input_size;
  const ManipulationTable table = table_from_flags(param_set, exclude);

  std::unique_ptr<Generator> generator;
  if (!generator_file.empty()) {
    require_artifact(generator_file, "generator checkpoint");
    generator = load_generator(generator_file);
  }

  fs::create_directories(out_dir);
  const fs::path png_dir = fs::path(out_dir) / "eval_patches";
  Rng rng(derive_seed(seed, "eval"));
  std::vector<ImageBuffer> before, after;
  std::vector<double> psnrs, ssims;
  for (int i = 0; i < patches; ++i) {
    const std::string& id = split.eval_ids[rng.uniform_int(split.eval_ids.size())];
    ImageBuffer image = provider.load(id);
    auto grid = patch_grid(image.height, image.width, patch_size);
    if (grid.empty()) throw std::runtime_error("eval image smaller than patch: " + id);
    PatchOrigin origin = grid[rng.uniform_int(grid.size())];
    const ManipulationSpec spec = table.specs()[rng.uniform_int(table.size())];
    ImageBuffer manipulated = apply_manipulation(image, spec, rng.next_u64());
    ImageBuffer patch = crop(manipulated, origin.row, origin.col, patch_size, patch_size);
    ImageBuffer patch_rt =
        png_roundtrip(patch, png_dir / ("p" + std::to_string(i) + "-manipulated.png"));
    before.push_back(patch_rt);
    if (generator) {
      ImageBuffer attacked = attack_patch(*generator, patch_rt);
      ImageBuffer attacked_rt =
          png_roundtrip(attacked, png_dir / ("p" + std::to_string(i) + "-attacked.png"));
      psnrs.push_back(psnr(attacked_rt, patch_rt));
      ssims.push_back(ssim(attacked_rt, patch_rt));
      after.push_back(std::move(attacked_rt));
    }
  }

  AttackReport report;
  report.victim_id = architecture_name(victim->cfg().arch);
  report.class_def = victim->cfg().class_def;
  report.asr_before = attack_success_rate(predict_labels(*victim, before), kUnalteredLabel);
  report.n_patches = patches;
  if (generator) {
    report.asr = attack_success_rate(predict_labels(*victim, after), kUnalteredLabel);
    const MeanPsnr mp = mean_psnr(psnrs);
    report.mean_psnr = mp.mean;
    report.psnr_excluded = mp.infinite_count;
    double acc = 0.0;
    for (double s : ssims) acc += s;
    report.mean_ssim = acc / static_cast<double>(ssims.size());
  }
  LabeledPatchSet baseline_set =
      build_labeled_patches(provider, split.eval_ids, table, victim->cfg().class_def, patch_size,
                            2, derive_seed(seed, "baseline"));
  report.baseline_accuracy = baseline_accuracy(*victim, baseline_set);

  save_reports_json({report}, fs::path(out_dir) / "report.json");
  std::ofstream(fs::path(out_dir) / "report.csv") << render_report({report}, ReportFormat::Csv);
  std::cout << render_report({report}, ReportFormat::Text);
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& format,
               const std::string& out_file) {
  std::vector<AttackReport> reports;
  for (const auto& f : inputs) {
    require_artifact(f, "report file");
    for (auto& r : load_reports_json(f)) reports.push_back(std::move(r));
  }
  const ReportFormat fmt = format == "csv" ? ReportFormat::Csv : ReportFormat::Text;
  const std::string rendered = render_report(reports, fmt);
  if (out_file.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(out_file);
    if (!out) throw std::runtime_error("cannot write " + out_file);
    out << rendered;
  }
  return 0;
}

int cmd_validate_plan(const std::string& plan_file, const std::string& param_set,
                      const std::string& exclude) {
  require_artifact(plan_file, "plan file");
  const ScenarioPlan plan = load_plan(plan_file);
  const ManipulationTable table = table_from_flags(param_set, exclude);
  const auto violations = validate_plan(plan, table);
  if (violations.empty()) {
    std::cout << "ok: " << scenario_name_str(plan.name) << " plan " << plan_hash(plan) << "\n";
    return 0;
  }
  for (const auto& v : violations) std::cout << "violation: " << v << "\n";
  return 1;
}

int cmd_run_scenario(const std::string& plan_file, const std::string& corpus_dir,
                     const std::string& out_root, std::uint64_t seed, bool desk_scale,
                     const std::string& ablation) {
  require_artifact(plan_file, "plan file");
  const ScenarioPlan plan = load_plan(plan_file);
  DirectoryImageProvider provider(corpus_dir);
  RunConfig cfg = desk_scale ? RunConfig::desk_profile() : RunConfig::paper_profile();

  ScenarioArm arm{"base", plan, false, false};
  if (!ablation.empty()) {
    bool found = false;
    for (const auto& a : ablation_arms(plan))
      if (a.name == ablation) {
        arm = a;
        found = true;
      }
    if (!found) throw std::runtime_error("unknown ablation arm: " + ablation);
  }

  ScenarioOutcome outcome = run_arm(arm, cfg, provider, out_root, seed);
  std::cerr << (outcome.loaded_from_cache ? "loaded cached run " : "completed run ")
            << outcome.run_id << " in " << outcome.run_dir << "\n";
  std::cout << render_report(outcome.reports, ReportFormat::Text);
  return 0;
}

int cmd_example_plans(const std::string& out_dir) {
  fs::create_directories(out_dir);
  auto member = [](Architecture a, ClassDefinition d, const std::string& split) {
    return EnsembleMemberSpec{a, d, split, {}};
  };
  const auto defs = {ClassDefinition::Detection, ClassDefinition::Identification,
                     ClassDefinition::Parameterization};

  ScenarioPlan perfect;
  perfect.name = ScenarioName::Perfect;
  perfect.attacker_split = perfect.victim_split = "I";
  perfect.victim_arch = Architecture::ConstrainedFront;
  perfect.victim_class_def = ClassDefinition::Detection;
  for (auto d : defs) perfect.ensemble.push_back(member(Architecture::ConstrainedFront, d, "I"));
  save_plan(perfect, fs::path(out_dir) / "perfect.json");

  ScenarioPlan data;
  data.name = ScenarioName::DataMismatch;
  data.attacker_split = "A";
  data.victim_split = "I";
  data.victim_arch = Architecture::ConstrainedFront;
  data.victim_class_def = ClassDefinition::Detection;
  for (Architecture a : {Architecture::ConstrainedFront, Architecture::HighpassFront,
                         Architecture::PlainConv, Architecture::DenseStyle,
                         Architecture::ResidualStyle})
    for (auto d : defs) data.ensemble.push_back(member(a, d, "A"));
  save_plan(data, fs::path(out_dir) / "data_mismatch.json");

  // the memory-driven two-ensemble partition, written out as two plans: one
  // attacks the large architecture with a reduced ensemble, the other covers
  // the remaining victims without it
  ScenarioPlan big = data;
  big.victim_arch = Architecture::DeepVggStyle;
  big.ensemble.clear();
  for (auto d : defs) {
    big.ensemble.push_back(member(Architecture::DeepVggStyle, d, "A"));
    big.ensemble.push_back(member(Architecture::ConstrainedFront, d, "A"));
  }
  save_plan(big, fs::path(out_dir) / "data_mismatch_large_victim.json");
  ScenarioPlan rest = data;
  save_plan(rest, fs::path(out_dir) / "data_mismatch_other_victims.json");

  ScenarioPlan param = data;
  param.name = ScenarioName::DataParamMismatch;
  const ManipulationTable reduced = ManipulationTable::standard().without(
      {{ManipKind::Awgn, 1.5}, {ManipKind::GaussianBlur, 2.5}, {ManipKind::MedianFilter, 7}});
  param.param_subset = reduced.specs();
  param.eval_param_subset = {
      {ManipKind::Awgn, 1.5}, {ManipKind::GaussianBlur, 2.5}, {ManipKind::MedianFilter, 7}};
  save_plan(param, fs::path(out_dir) / "data_param_mismatch_unseen_eval.json");
  param.eval_param_subset.clear();
  save_plan(param, fs::path(out_dir) / "data_param_mismatch.json");

  ScenarioPlan arch;
  arch.name = ScenarioName::DataArchMismatch;
  arch.attacker_split = "A";
  arch.victim_split = "I";
  arch.victim_arch = Architecture::DeepVggStyle;
  arch.victim_class_def = ClassDefinition::Detection;
  for (Architecture a : {Architecture::ConstrainedFront, Architecture::HighpassFront,
                         Architecture::PlainConv})
    for (auto d : defs) arch.ensemble.push_back(member(a, d, "A"));
  save_plan(arch, fs::path(out_dir) / "data_arch_mismatch.json");

  std::cerr << "wrote example plans to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ensemble-guided anti-forensic GAN toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic test corpus");
  std::string synth_out = "corpus";
  int synth_count = 200, synth_h = 96, synth_w = 96;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--count", synth_count, "number of images");
  synth->add_option("--height", synth_h, "image height");
  synth->add_option("--width", synth_w, "image width");
  synth->add_option("--seed", synth_seed, "generation seed");

  // prepare
  auto* prepare = app.add_subcommand("prepare", "split a corpus and materialize manipulations");
  std::string prep_in = default_data_root(), prep_out = "prepared";
  std::uint64_t prep_seed = 1;
  int prep_patch = 256;
  std::string prep_params, prep_exclude;
  prepare->add_option("--input-dir", prep_in, "directory of source images")->required();
  prepare->add_option("--out", prep_out, "output directory");
  prepare->add_option("--seed", prep_seed, "split seed");
  prepare->add_option("--patch-size", prep_patch, "patch size for the index");
  prepare->add_option("--param-set", prep_params, "comma list like awgn:0.5,median:3");
  prepare->add_option("--exclude", prep_exclude, "specs to drop from the standard table");

  // train-surrogate
  auto* tsur = app.add_subcommand("train-surrogate", "train one forensic classifier");
  std::string ts_corpus = default_data_root(), ts_manifest, ts_arch = "constrained_front";
  std::string ts_classdef = "detection", ts_split = "I", ts_out = "runs/surrogates";
  std::string ts_params, ts_exclude;
  std::uint64_t ts_seed = 1;
  int ts_patch = 32, ts_width = 8, ts_fc = 24, ts_epochs = 8, ts_ppi = 2, ts_batch = 0;
  double ts_lr = 0;
  tsur->add_option("--corpus", ts_corpus, "directory of source images")->required();
  tsur->add_option("--manifest", ts_manifest, "split manifest from prepare")->required();
  tsur->add_option("--arch", ts_arch, "architecture id");
  tsur->add_option("--class-def", ts_classdef, "detection|identification|parameterization");
  tsur->add_option("--split", ts_split, "training split (I or A)");
  tsur->add_option("--out", ts_out, "checkpoint directory");
  tsur->add_option("--seed", ts_seed, "training seed");
  tsur->add_option("--patch-size", ts_patch, "input patch size");
  tsur->add_option("--width", ts_width, "conv width");
  tsur->add_option("--fc", ts_fc, "dense width");
  tsur->add_option("--epochs", ts_epochs, "training epochs");
  tsur->add_option("--patches-per-image", ts_ppi, "tiles sampled per image and spec");
  tsur->add_option("--param-set", ts_params, "restrict the manipulation table");
  tsur->add_option("--exclude", ts_exclude, "drop specs from the table");
  tsur->add_option("--lr", ts_lr, "override the initial learning rate");
  tsur->add_option("--batch", ts_batch, "override the batch size");

  // train-attack
  auto* tatk = app.add_subcommand("train-attack", "train the trace-removal generator");
  std::string ta_corpus = default_data_root(), ta_manifest, ta_out = "runs/attack";
  std::vector<std::string> ta_ensemble;
  std::string ta_split = "A", ta_params, ta_exclude;
  std::uint64_t ta_seed = 1;
  int ta_patch = 32, ta_g1 = 12, ta_g2 = 24, ta_epochs = 4, ta_steps = 60, ta_batch = 10;
  bool ta_gamma0 = false, ta_unpaired = false, ta_nonsat = false;
  tatk->add_option("--corpus", ta_corpus, "directory of source images")->required();
  tatk->add_option("--manifest", ta_manifest, "split manifest from prepare")->required();
  tatk->add_option("--ensemble", ta_ensemble, "surrogate checkpoints")->required();
  tatk->add_option("--split", ta_split, "attacker split");
  tatk->add_option("--out", ta_out, "run directory");
  tatk->add_option("--seed", ta_seed, "training seed");
  tatk->add_option("--patch-size", ta_patch, "training patch size");
  tatk->add_option("--gen-width1", ta_g1, "first conv block width");
  tatk->add_option("--gen-width2", ta_g2, "second conv block width");
  tatk->add_option("--epochs", ta_epochs, "training epochs");
  tatk->add_option("--steps", ta_steps, "steps per epoch");
  tatk->add_option("--batch", ta_batch, "batch size");
  tatk->add_flag("--gamma0", ta_gamma0, "drop the discriminator (ablation)");
  tatk->add_flag("--unpaired", ta_unpaired, "train without pixel correspondence (ablation)");
  tatk->add_flag("--nonsaturating", ta_nonsat, "use the -log D adversarial variant");
  tatk->add_option("--param-set", ta_params, "restrict the manipulation table");
  tatk->add_option("--exclude", ta_exclude, "drop specs from the table");

  // attack
  auto* atk = app.add_subcommand("attack", "run the generator on a full image");
  std::string a_gen, a_in, a_out = "attacked.png";
  int a_patch = 256;
  atk->add_option("--generator", a_gen, "generator checkpoint")->required();
  atk->add_option("--input", a_in, "input image (png/jpeg/ppm)")->required();
  atk->add_option("--out", a_out, "output png");
  atk->add_option("--patch-size", a_patch, "tile size");

  // eval
  auto* ev = app.add_subcommand("eval", "classify (attacked) eval patches with a victim");
  std::string e_corpus = default_data_root(), e_manifest, e_victim, e_gen, e_out = "runs/eval";
  std::string e_params, e_exclude;
  std::uint64_t e_seed = 1;
  int e_patches = 64;
  ev->add_option("--corpus", e_corpus, "directory of source images")->required();
  ev->add_option("--manifest", e_manifest, "split manifest from prepare")->required();
  ev->add_option("--victim", e_victim, "victim checkpoint")->required();
  ev->add_option("--generator", e_gen, "generator checkpoint (omit for the before-attack rate)");
  ev->add_option("--out", e_out, "output directory");
  ev->add_option("--seed", e_seed, "sampling seed");
  ev->add_option("--patches", e_patches, "number of eval patches");
  ev->add_option("--param-set", e_params, "restrict the manipulation table");
  ev->add_option("--exclude", e_exclude, "drop specs from the table");

  // report
  auto* rep = app.add_subcommand("report", "merge report files into one table");
  std::vector<std::string> r_inputs;
  std::string r_format = "text", r_out;
  rep->add_option("--inputs", r_inputs, "report.json files")->required();
  rep->add_option("--format", r_format, "csv or text");
  rep->add_option("--out", r_out, "output file (stdout when omitted)");

  // validate-plan
  auto* vp = app.add_subcommand("validate-plan", "check a scenario plan's invariants");
  std::string v_plan, v_params, v_exclude;
  vp->add_option("--plan", v_plan, "plan json file")->required();
  vp->add_option("--param-set", v_params, "restrict the manipulation table");
  vp->add_option("--exclude", v_exclude, "drop specs from the table");

  // run-scenario
  auto* rs = app.add_subcommand("run-scenario", "train, attack and evaluate one plan");
  std::string s_plan, s_corpus = default_data_root(), s_out = "runs/scenarios", s_ablation;
  std::uint64_t s_seed = 1;
  bool s_desk = false;
  rs->add_option("--plan", s_plan, "plan json file")->required();
  rs->add_option("--corpus", s_corpus, "directory of source images")->required();
  rs->add_option("--out", s_out, "run root directory");
  rs->add_option("--seed", s_seed, "run seed");
  rs->add_flag("--desk-scale", s_desk, "shrunk profile that runs in minutes");
  rs->add_option("--ablation", s_ablation,
                 "no_discriminator|single_architecture|unpaired|single_surrogate");

  // example-plans
  auto* ep = app.add_subcommand("example-plans", "write the four scenario compositions");
  std::string ep_out = "plans";
  ep->add_option("--out", ep_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(synth_out, synth_count, synth_h, synth_w, synth_seed);
    if (*prepare)
      return cmd_prepare(prep_in, prep_out, prep_seed, prep_patch, prep_params, prep_exclude);
    if (*tsur)
      return cmd_train_surrogate(ts_corpus, ts_manifest, ts_arch, ts_classdef, ts_split, ts_out,
                                 ts_seed, ts_patch, ts_width, ts_fc, ts_epochs, ts_ppi, ts_params,
                                 ts_exclude, ts_lr, ts_batch);
    if (*tatk)
      return cmd_train_attack(ta_corpus, ta_manifest, ta_ensemble, ta_split, ta_out, ta_seed,
                              ta_patch, ta_g1, ta_g2, ta_epochs, ta_steps, ta_batch, ta_gamma0,
                              ta_unpaired, ta_nonsat, ta_params, ta_exclude);
    if (*atk) return cmd_attack(a_gen, a_in, a_out, a_patch);
    if (*ev)
      return cmd_eval(e_corpus, e_manifest, e_victim, e_gen, e_out, e_seed, e_patches, e_params,
                      e_exclude);
    if (*rep) return cmd_report(r_inputs, r_format, r_out);
    if (*vp) return cmd_validate_plan(v_plan, v_params, v_exclude);
    if (*rs) return cmd_run_scenario(s_plan, s_corpus, s_out, s_seed, s_desk, s_ablation);
    if (*ep) return cmd_example_plans(ep_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
