#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "tracegan/corpus.hpp"
#include "tracegan/losses.hpp"
#include "tracegan/nets.hpp"
#include "tracegan/optim.hpp"

namespace tracegan {

// ---------------------------------------------------------------------------
// surrogate training

struct SurrogateTrainCfg {
  int epochs = 43;
  int batch = 25;
  double lr0 = 0.0005;
  LrSchedule schedule = LrSchedule::HalveEvery4Epochs;
  int early_stop_patience = 2;  // consecutive epochs of rising training loss
  int max_steps_per_epoch = 0;  // 0: one pass over the data
};

// the highpass-front member trains with batch 50, lr 0.001 and the
// 10%-per-5000-iterations decay; everything else uses the epoch schedule
SurrogateTrainCfg default_surrogate_cfg(Architecture arch);

struct SurrogateTrainResult {
  double holdout_accuracy = 0.0;
  int epochs_run = 0;
  long steps = 0;
  std::vector<double> epoch_losses;
  bool stopped_early = false;
};

SurrogateTrainResult train_surrogate(Surrogate& net, const LabeledPatchSet& train,
                                     const LabeledPatchSet& holdout,
                                     const SurrogateTrainCfg& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// attack (GAN) training

struct GanTrainCfg {
  int epochs = 12;
  int batch = 25;
  int steps_per_epoch = 100;
  double lr0 = 0.0001;
  LrSchedule schedule = LrSchedule::HalveEvery4Epochs;
  LossWeights weights;                    // defaults to all ones
  bool nonsaturating_adversarial = false; // -log D variant, off by default
  bool perceptual_target_input = false;   // unpaired arm: L_p against the generator input
};

struct SurrogateEnsemble {
  std::vector<Surrogate*> members;  // frozen: never updated by train_attack
  std::vector<double> betas;        // per-member loss weights
};

class PairedBatchSource {
 public:
  virtual ~PairedBatchSource() = default;
  virtual std::vector<PairedSample> batch(int batch_size, std::uint64_t seed) const = 0;
};

class CorpusBatchSource : public PairedBatchSource {
 public:
  CorpusBatchSource(const ImageProvider& provider, std::vector<std::string> ids,
                    ManipulationTable table, std::vector<ManipulationSpec> specs, int patch_size,
                    bool paired = true);
  std::vector<PairedSample> batch(int batch_size, std::uint64_t seed) const override;

 private:
  const ImageProvider& provider_;
  std::vector<std::string> ids_;
  ManipulationTable table_;
  std::vector<ManipulationSpec> specs_;
  int patch_size_;
  bool paired_;
};

struct GanTrainResult {
  long steps = 0;
  LossReport first_step;
  LossReport last_step;
};

// Alternates one discriminator step (minimizing -L_D on unaltered vs
// generated pairs) with one generator step (minimizing the composite loss
// through the frozen ensemble and the current discriminator). With
// weights.gamma == 0 the discriminator is left untrained. Writes one metrics
// line per step when a log stream is given and a checkpoint per epoch when
// checkpoint_dir is non-empty.
GanTrainResult train_attack(Generator& generator, Discriminator& discriminator,
                            const SurrogateEnsemble& ensemble, const PairedBatchSource& data,
                            const GanTrainCfg& cfg, std::uint64_t seed,
                            std::ostream* metrics_log = nullptr,
                            const std::filesystem::path& checkpoint_dir = {},
                            const std::string& config_hash = {});

}  // namespace tracegan
