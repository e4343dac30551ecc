#include "tracegan/training.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "tracegan/checkpoint.hpp"
#include "tracegan/evaluation.hpp"
#include "tracegan/rng.hpp"

namespace tracegan {

// ---------------------------------------------------------------------------
// surrogate training

SurrogateTrainCfg default_surrogate_cfg(Architecture arch) {
  SurrogateTrainCfg cfg;
  if (arch == Architecture::HighpassFront) {
    cfg.batch = 50;
    cfg.lr0 = 0.001;
    cfg.schedule = LrSchedule::Decay10PctEvery5000Iters;
  }
  return cfg;
}

SurrogateTrainResult train_surrogate(Surrogate& net, const LabeledPatchSet& train,
                                     const LabeledPatchSet& holdout,
                                     const SurrogateTrainCfg& cfg, std::uint64_t seed) {
  if (train.num_classes != net.cfg().num_classes)
    throw std::invalid_argument("train_surrogate: label/class-count mismatch");
  if (train.patches.empty()) throw std::invalid_argument("train_surrogate: empty training set");

  Sgd sgd;
  SurrogateTrainResult result;
  long iteration = 0;
  int rising_epochs = 0;
  double prev_loss = std::numeric_limits<double>::infinity();
  const std::size_t n = train.patches.size();

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(seed, "epoch:" + std::to_string(epoch)));
    for (std::size_t i = n - 1; i > 0; --i) {
      std::size_t j = shuffle_rng.uniform_int(i + 1);
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    long epoch_steps = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch) {
      if (cfg.max_steps_per_epoch > 0 && epoch_steps >= cfg.max_steps_per_epoch) break;
      const std::size_t end = std::min(n, start + cfg.batch);
      const int bs = static_cast<int>(end - start);

      std::vector<const ImageBuffer*> ptrs(bs);
      std::vector<int> labels(bs);
      for (int k = 0; k < bs; ++k) {
        ptrs[k] = &train.patches[order[start + k]];
        labels[k] = train.labels[order[start + k]];
      }

      net.net().zero_grads();
      Tensor probs = net.forward(patches_to_tensor(ptrs), true);

      double loss = 0.0;
      Tensor grad(probs.n, probs.c, 1, 1);
      for (int k = 0; k < bs; ++k) {
        const double p = probs.at(k, labels[k], 0, 0);
        loss += -std::log(std::max(p, kProbEps));
        grad.at(k, labels[k], 0, 0) = d_classification_loss_dprob(p) / bs;
      }
      loss /= bs;
      if (!std::isfinite(loss))
        throw std::runtime_error("train_surrogate: non-finite loss at step " +
                                 std::to_string(iteration));

      net.backward(grad);
      sgd.step(net.net().params(), lr_at(cfg.lr0, cfg.schedule, epoch, iteration));
      net.net().project_constraints();

      epoch_loss += loss;
      ++epoch_steps;
      ++iteration;
    }
    epoch_loss /= std::max<long>(1, epoch_steps);
    result.epoch_losses.push_back(epoch_loss);
    result.epochs_run = epoch + 1;

    if (epoch_loss > prev_loss) {
      if (++rising_epochs >= cfg.early_stop_patience) {
        result.stopped_early = true;
        break;
      }
    } else {
      rising_epochs = 0;
    }
    prev_loss = epoch_loss;
  }

  result.steps = iteration;
  if (!holdout.patches.empty()) result.holdout_accuracy = baseline_accuracy(net, holdout);
  return result;
}

// ---------------------------------------------------------------------------
// attack training

CorpusBatchSource::CorpusBatchSource(const ImageProvider& provider, std::vector<std::string> ids,
                                     ManipulationTable table, std::vector<ManipulationSpec> specs,
                                     int patch_size, bool paired)
    : provider_(provider),
      ids_(std::move(ids)),
      table_(std::move(table)),
      specs_(std::move(specs)),
      patch_size_(patch_size),
      paired_(paired) {}

std::vector<PairedSample> CorpusBatchSource::batch(int batch_size, std::uint64_t seed) const {
  if (paired_)
    return build_paired_batch(provider_, ids_, batch_size, table_, specs_, patch_size_, seed);
  return build_unpaired_batch(provider_, ids_, batch_size, table_, specs_, patch_size_, seed);
}

namespace {

LossWeights resolve_weights(const LossWeights& weights, std::size_t ensemble_size) {
  LossWeights w = weights;
  if (w.betas.size() == 1 && ensemble_size > 1) w.betas.assign(ensemble_size, w.betas[0]);
  if (w.betas.size() != ensemble_size)
    throw std::invalid_argument("train_attack: beta count does not match ensemble size");
  return w;
}

}  // namespace

GanTrainResult train_attack(Generator& generator, Discriminator& discriminator,
                            const SurrogateEnsemble& ensemble, const PairedBatchSource& data,
                            const GanTrainCfg& cfg, std::uint64_t seed,
                            std::ostream* metrics_log, const std::filesystem::path& checkpoint_dir,
                            const std::string& config_hash) {
  if (ensemble.members.empty()) throw std::invalid_argument("train_attack: empty ensemble");
  const LossWeights weights = resolve_weights(
      [&] {
        LossWeights w = cfg.weights;
        if (!ensemble.betas.empty()) w.betas = ensemble.betas;
        return w;
      }(),
      ensemble.members.size());

  const std::size_t S = ensemble.members.size();
  const bool use_disc = weights.gamma != 0.0;
  Adam adam;  // generator: adaptive moments
  Sgd sgd;    // discriminator: plain stochastic gradient descent

  GanTrainResult result;
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int s = 0; s < cfg.steps_per_epoch; ++s, ++step) {
      const double lr = lr_at(cfg.lr0, cfg.schedule, epoch, step);
      const std::vector<PairedSample> samples =
          data.batch(cfg.batch, derive_seed(seed, static_cast<std::uint64_t>(step)));
      const int bs = static_cast<int>(samples.size());

      std::vector<const ImageBuffer*> unaltered(bs), manipulated(bs);
      for (int i = 0; i < bs; ++i) {
        unaltered[i] = &samples[static_cast<std::size_t>(i)].unaltered;
        manipulated[i] = &samples[static_cast<std::size_t>(i)].manipulated;
      }
      const Tensor real = patches_to_tensor(unaltered);
      const Tensor input = patches_to_tensor(manipulated);

      LossReport report;
      report.classification.assign(S, 0.0);

      // --- discriminator step on (unaltered, generated) ---
      if (use_disc) {
        set_grad_enabled(false);
        const Tensor fake = generator.forward(input, false);
        set_grad_enabled(true);

        discriminator.net().zero_grads();
        discriminator.net().set_bn_update(true);

        Tensor d_real = discriminator.forward(real, true);
        Tensor g_real(bs, 1, 1, 1);
        for (int i = 0; i < bs; ++i)  // minimize -L_D
          g_real.v[static_cast<std::size_t>(i)] =
              -d_discriminator_loss_dreal(d_real.v[static_cast<std::size_t>(i)]) / bs;
        discriminator.backward(g_real);

        Tensor d_fake = discriminator.forward(fake, true);
        Tensor g_fake(bs, 1, 1, 1);
        for (int i = 0; i < bs; ++i)
          g_fake.v[static_cast<std::size_t>(i)] =
              -d_discriminator_loss_dfake(d_fake.v[static_cast<std::size_t>(i)]) / bs;
        discriminator.backward(g_fake);

        sgd.step(discriminator.net().params(), lr);
        discriminator.net().project_constraints();

        for (int i = 0; i < bs; ++i)
          report.discriminator += discriminator_loss(d_real.v[static_cast<std::size_t>(i)],
                                                     d_fake.v[static_cast<std::size_t>(i)]);
        report.discriminator /= bs;
      }

      // --- generator step through the frozen ensemble and current critic ---
      generator.net().zero_grads();
      Tensor generated = generator.forward(input, true);
      Tensor grad_generated(generated.n, generated.c, generated.h, generated.w);

      // perceptual term (targets the unaltered patch; the unpaired arm
      // targets the generator's input instead)
      const Tensor& target = cfg.perceptual_target_input ? input : real;
      report.perceptual = perceptual_loss(target, generated);
      const double pixel_norm = static_cast<double>(generated.n) * generated.h * generated.w;
      for (std::size_t i = 0; i < grad_generated.v.size(); ++i) {
        const double d = generated.v[i] - target.v[i];
        grad_generated.v[i] =
            weights.alpha * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / pixel_norm;
      }

      // classification terms; members stay frozen (inference statistics, no
      // parameter updates)
      for (std::size_t m = 0; m < S; ++m) {
        Surrogate& member = *ensemble.members[m];
        member.net().zero_grads();
        Tensor probs = member.forward(generated, false);
        Tensor g_probs(bs, probs.c, 1, 1);
        double loss = 0.0;
        for (int i = 0; i < bs; ++i) {
          const double p = probs.at(i, kUnalteredLabel, 0, 0);
          loss += classification_loss(
              std::vector<double>(&probs.v[static_cast<std::size_t>(i) * probs.c],
                                  &probs.v[static_cast<std::size_t>(i) * probs.c] + probs.c),
              kUnalteredLabel);
          g_probs.at(i, kUnalteredLabel, 0, 0) = d_classification_loss_dprob(p) / bs;
        }
        report.classification[m] = loss / bs;
        Tensor g_input = member.backward(g_probs);
        for (std::size_t i = 0; i < grad_generated.v.size(); ++i)
          grad_generated.v[i] += weights.betas[m] * g_input.v[i];
      }

      // adversarial term through the current discriminator
      if (use_disc) {
        discriminator.net().zero_grads();
        discriminator.net().set_bn_update(false);  // critic pass must not drift the stats
        Tensor d_gen = discriminator.forward(generated, true);
        Tensor g_d(bs, 1, 1, 1);
        double loss = 0.0;
        for (int i = 0; i < bs; ++i) {
          const double d = d_gen.v[static_cast<std::size_t>(i)];
          loss += cfg.nonsaturating_adversarial ? adversarial_loss_nonsaturating(d)
                                                : adversarial_loss(d);
          g_d.v[static_cast<std::size_t>(i)] =
              (cfg.nonsaturating_adversarial ? d_adversarial_loss_nonsaturating_dd(d)
                                             : d_adversarial_loss_dd(d)) /
              bs;
        }
        report.adversarial = loss / bs;
        Tensor g_input = discriminator.backward(g_d);
        discriminator.net().set_bn_update(true);
        for (std::size_t i = 0; i < grad_generated.v.size(); ++i)
          grad_generated.v[i] += weights.gamma * g_input.v[i];
      }

      report.generator_total =
          generator_total(report.perceptual, report.classification, report.adversarial, weights);
      if (!std::isfinite(report.generator_total))
        throw std::runtime_error(
            "train_attack: non-finite total loss at step " + std::to_string(step) +
            (checkpoint_dir.empty() ? "" : "; last epoch checkpoint retained"));

      generator.backward(grad_generated);
      adam.step(generator.net().params(), lr);

      if (metrics_log) {
        if (step == 0) write_metrics_header(*metrics_log, S);
        write_metrics_line(*metrics_log, step, report);
      }
      if (step == 0) result.first_step = report;
      result.last_step = report;
    }

    if (!checkpoint_dir.empty()) {
      generator.mark_trained();
      save_generator(generator, checkpoint_dir / "generator" / (std::to_string(epoch) + ".ckpt"),
                     config_hash);
      if (use_disc)
        save_discriminator(discriminator,
                           checkpoint_dir / "discriminator" / (std::to_string(epoch) + ".ckpt"),
                           config_hash);
    }
  }
  generator.mark_trained();
  result.steps = step;
  return result;
}

}  // namespace tracegan
