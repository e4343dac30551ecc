#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tracegan/checkpoint.hpp"
#include "tracegan/evaluation.hpp"
#include "tracegan/losses.hpp"
#include "tracegan/optim.hpp"
#include "tracegan/rng.hpp"
#include "tracegan/synth.hpp"
#include "tracegan/training.hpp"

using namespace tracegan;

namespace {

SurrogateCfg mini_surrogate_cfg(Architecture arch, int classes, int input) {
  SurrogateCfg cfg;
  cfg.arch = arch;
  cfg.class_def = ClassDefinition::Detection;
  cfg.num_classes = classes;
  cfg.input_size = input;
  cfg.width = 4;
  cfg.fc = 8;
  return cfg;
}

struct MiniAttackSetup {
  MemoryImageProvider provider;
  ManipulationTable table{{{ManipKind::Awgn, 2.5}}};
  std::unique_ptr<Surrogate> member;
  std::unique_ptr<Generator> generator;
  std::unique_ptr<Discriminator> discriminator;
  std::unique_ptr<CorpusBatchSource> source;

  explicit MiniAttackSetup(std::uint64_t seed) {
    provider = synth_corpus(6, 32, 32, seed);
    member = std::make_unique<Surrogate>(mini_surrogate_cfg(Architecture::PlainConv, 2, 16),
                                         derive_seed(seed, 1));
    generator = std::make_unique<Generator>(GeneratorCfg{4, 4}, derive_seed(seed, 2));
    discriminator = std::make_unique<Discriminator>(
        DiscriminatorCfg{16, 2, {4, 4, 4, 4}, 8, 8}, derive_seed(seed, 3));
    source = std::make_unique<CorpusBatchSource>(provider, provider.ids(), table, table.specs(),
                                                 16, true);
  }

  SurrogateEnsemble ensemble() {
    SurrogateEnsemble e;
    e.members = {member.get()};
    e.betas = {1.0};
    return e;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// learning-rate schedules

TEST_CASE("epoch schedule halves every 4 epochs") {
  CHECK(lr_at(0.0005, LrSchedule::HalveEvery4Epochs, 0, 0) == doctest::Approx(0.0005));
  CHECK(lr_at(0.0005, LrSchedule::HalveEvery4Epochs, 3, 999) == doctest::Approx(0.0005));
  CHECK(lr_at(0.0005, LrSchedule::HalveEvery4Epochs, 4, 0) == doctest::Approx(0.00025));
  CHECK(lr_at(0.0005, LrSchedule::HalveEvery4Epochs, 8, 0) == doctest::Approx(0.000125));
}

TEST_CASE("gan schedule hits the reported values") {
  CHECK(lr_at(0.0001, LrSchedule::HalveEvery4Epochs, 0, 0) == doctest::Approx(0.0001));
  // two halvings at epochs 4 and 8
  CHECK(lr_at(0.0001, LrSchedule::HalveEvery4Epochs, 11, 0) == doctest::Approx(0.000025));
}

TEST_CASE("iteration schedule decays 10 percent every 5000 iterations") {
  CHECK(lr_at(0.001, LrSchedule::Decay10PctEvery5000Iters, 0, 0) == doctest::Approx(0.001));
  CHECK(lr_at(0.001, LrSchedule::Decay10PctEvery5000Iters, 0, 4999) == doctest::Approx(0.001));
  CHECK(lr_at(0.001, LrSchedule::Decay10PctEvery5000Iters, 0, 5000) ==
        doctest::Approx(0.001 * 0.9));
  CHECK(lr_at(0.001, LrSchedule::Decay10PctEvery5000Iters, 0, 10000) ==
        doctest::Approx(0.001 * 0.81));
  CHECK_THROWS(lr_at(0.001, LrSchedule::Decay10PctEvery5000Iters, -1, 0));
}

TEST_CASE("schedule matches the closed form lr0 * 0.5^(e/4)") {
  for (long e = 0; e < 44; ++e)
    CHECK(lr_at(0.0005, LrSchedule::HalveEvery4Epochs, e, 0) ==
          doctest::Approx(0.0005 * std::pow(0.5, static_cast<double>(e / 4))).epsilon(1e-12));
}

TEST_CASE("highpass-front members get the reported training profile") {
  SurrogateTrainCfg hp = default_surrogate_cfg(Architecture::HighpassFront);
  CHECK(hp.batch == 50);
  CHECK(hp.lr0 == doctest::Approx(0.001));
  CHECK(hp.schedule == LrSchedule::Decay10PctEvery5000Iters);

  SurrogateTrainCfg base = default_surrogate_cfg(Architecture::ConstrainedFront);
  CHECK(base.epochs == 43);
  CHECK(base.batch == 25);
  CHECK(base.lr0 == doctest::Approx(0.0005));
  CHECK(base.schedule == LrSchedule::HalveEvery4Epochs);
  CHECK(base.early_stop_patience == 2);
}

// ---------------------------------------------------------------------------
// optimizers

TEST_CASE("sgd takes the plain gradient step and skips frozen params") {
  Param p{"w", Tensor(1, 2, 1, 1), Tensor(1, 2, 1, 1), true};
  p.value.v = {1.0, -1.0};
  p.grad.v = {0.5, 0.25};
  Param frozen{"f", Tensor(1, 1, 1, 1), Tensor(1, 1, 1, 1), false};
  frozen.value.v = {3.0};
  frozen.grad.v = {100.0};
  Sgd sgd;
  sgd.step({&p, &frozen}, 0.1);
  CHECK(p.value.v[0] == doctest::Approx(0.95));
  CHECK(p.value.v[1] == doctest::Approx(-1.025));
  CHECK(frozen.value.v[0] == 3.0);
}

TEST_CASE("adam's first step moves by ~lr in the gradient direction") {
  Param p{"w", Tensor(1, 2, 1, 1), Tensor(1, 2, 1, 1), true};
  p.value.v = {0.0, 0.0};
  p.grad.v = {0.3, -0.7};
  Adam adam;  // 0.9 / 0.999 / 1e-8
  adam.step({&p}, 0.01);
  CHECK(p.value.v[0] == doctest::Approx(-0.01).epsilon(1e-4));
  CHECK(p.value.v[1] == doctest::Approx(0.01).epsilon(1e-4));
}

// ---------------------------------------------------------------------------
// surrogate training

TEST_CASE("train_surrogate rejects label/class mismatches") {
  Surrogate net(mini_surrogate_cfg(Architecture::PlainConv, 2, 16), 1);
  LabeledPatchSet data;
  data.num_classes = 4;  // net has 2
  data.patches.push_back(ImageBuffer(16, 16, PixelScale::Byte, 1.0));
  data.labels.push_back(0);
  CHECK_THROWS(train_surrogate(net, data, {}, SurrogateTrainCfg{}, 0));
}

TEST_CASE("surrogate training separates a crisp detection task") {
  MemoryImageProvider provider = synth_corpus(16, 32, 32, 77);
  ManipulationTable table({{ManipKind::Awgn, 2.5}});
  std::vector<std::string> ids = provider.ids();
  std::vector<std::string> train_ids(ids.begin(), ids.begin() + 13);
  std::vector<std::string> holdout_ids(ids.begin() + 13, ids.end());
  LabeledPatchSet train = build_labeled_patches(provider, train_ids, table,
                                                ClassDefinition::Detection, 16, 4, 5);
  LabeledPatchSet holdout = build_labeled_patches(provider, holdout_ids, table,
                                                  ClassDefinition::Detection, 16, 4, 6);
  Surrogate net(mini_surrogate_cfg(Architecture::ConstrainedFront, 2, 16), 9);
  SurrogateTrainCfg cfg;
  cfg.epochs = 40;
  cfg.batch = 13;
  cfg.lr0 = 0.01;
  SurrogateTrainResult result = train_surrogate(net, train, holdout, cfg, 11);
  CHECK(result.epochs_run >= 1);
  CHECK(result.steps > 0);
  CHECK(result.holdout_accuracy > 0.75);

  // constrained front still satisfies its constraint after real steps
  auto params = net.net().params();
  const Tensor& front = params[0]->value;
  for (int co = 0; co < front.n; ++co)
    for (int ci = 0; ci < front.c; ++ci) {
      CHECK(front.at(co, ci, 2, 2) == doctest::Approx(-1.0).epsilon(1e-12));
      double off = 0.0;
      for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
          if (y != 2 || x != 2) off += front.at(co, ci, y, x);
      CHECK(off == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("train_surrogate is deterministic in its loss trace") {
  MemoryImageProvider provider = synth_corpus(6, 32, 32, 3);
  ManipulationTable table({{ManipKind::MedianFilter, 5}});
  LabeledPatchSet train = build_labeled_patches(provider, provider.ids(), table,
                                                ClassDefinition::Detection, 16, 2, 5);
  SurrogateTrainCfg cfg;
  cfg.epochs = 2;
  cfg.batch = 8;
  auto run = [&] {
    Surrogate net(mini_surrogate_cfg(Architecture::PlainConv, 2, 16), 4);
    return train_surrogate(net, train, {}, cfg, 21).epoch_losses;
  };
  CHECK(run() == run());
}

// ---------------------------------------------------------------------------
// attack training

TEST_CASE("train_attack rejects an empty ensemble") {
  MiniAttackSetup s(1);
  SurrogateEnsemble empty;
  GanTrainCfg cfg;
  cfg.epochs = 1;
  cfg.steps_per_epoch = 1;
  cfg.batch = 2;
  CHECK_THROWS(
      train_attack(*s.generator, *s.discriminator, empty, *s.source, cfg, 0, nullptr, {}, {}));
}

TEST_CASE("ensemble members stay bitwise frozen through attack training") {
  MiniAttackSetup s(11);
  const std::uint64_t before = s.member->net().param_hash();
  GanTrainCfg cfg;
  cfg.epochs = 1;
  cfg.steps_per_epoch = 3;
  cfg.batch = 4;
  train_attack(*s.generator, *s.discriminator, s.ensemble(), *s.source, cfg, 5, nullptr, {}, {});
  CHECK(s.member->net().param_hash() == before);
  CHECK(s.generator->trained());
}

TEST_CASE("gamma zero leaves the discriminator untouched") {
  MiniAttackSetup s(13);
  const std::uint64_t d_before = s.discriminator->net().param_hash();
  GanTrainCfg cfg;
  cfg.epochs = 1;
  cfg.steps_per_epoch = 3;
  cfg.batch = 4;
  cfg.weights.gamma = 0.0;
  GanTrainResult r = train_attack(*s.generator, *s.discriminator, s.ensemble(), *s.source, cfg, 5,
                                  nullptr, {}, {});
  CHECK(s.discriminator->net().param_hash() == d_before);
  CHECK(r.last_step.adversarial == 0.0);
  CHECK(r.last_step.discriminator == 0.0);
}

TEST_CASE("identical seeds reproduce the first two steps exactly") {
  GanTrainCfg cfg;
  cfg.epochs = 1;
  cfg.steps_per_epoch = 2;
  cfg.batch = 4;
  auto run = [&](std::uint64_t seed) {
    MiniAttackSetup s(29);
    std::ostringstream log;
    train_attack(*s.generator, *s.discriminator, s.ensemble(), *s.source, cfg, seed, &log, {},
                 {});
    return log.str();
  };
  const std::string a = run(123), b = run(123), c = run(124);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.find("step,L_p,L_c1,L_a,L_G,L_D") == 0);
}

TEST_CASE("one tiny generator step does not increase the composite loss on its batch") {
  MiniAttackSetup s(31);
  const auto samples = s.source->batch(4, 99);
  std::vector<const ImageBuffer*> unaltered, manipulated;
  for (const auto& p : samples) {
    unaltered.push_back(&p.unaltered);
    manipulated.push_back(&p.manipulated);
  }
  const Tensor real = patches_to_tensor(unaltered);
  const Tensor input = patches_to_tensor(manipulated);
  LossWeights weights;

  auto composite = [&](bool with_grads) {
    Tensor out = s.generator->forward(input, true);
    const double lp = perceptual_loss(real, out);
    Tensor probs = s.member->forward(out, false);
    double lc = 0.0;
    for (int n = 0; n < probs.n; ++n)
      lc += classification_loss({probs.at(n, 0, 0, 0), probs.at(n, 1, 0, 0)}, 0);
    lc /= probs.n;
    Tensor d = s.discriminator->forward(out, true);
    double la = 0.0;
    for (int n = 0; n < d.n; ++n) la += adversarial_loss(d.v[static_cast<std::size_t>(n)]);
    la /= d.n;

    if (with_grads) {
      Tensor g(out.n, out.c, out.h, out.w);
      const double norm = static_cast<double>(out.n) * out.h * out.w;
      for (std::size_t i = 0; i < g.v.size(); ++i) {
        const double diff = out.v[i] - real.v[i];
        g.v[i] = (diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0)) / norm;
      }
      Tensor gp(probs.n, probs.c, 1, 1);
      for (int n = 0; n < probs.n; ++n)
        gp.at(n, 0, 0, 0) = d_classification_loss_dprob(probs.at(n, 0, 0, 0)) / probs.n;
      Tensor gi = s.member->backward(gp);
      for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] += gi.v[i];
      Tensor gd(d.n, 1, 1, 1);
      for (int n = 0; n < d.n; ++n)
        gd.v[static_cast<std::size_t>(n)] =
            d_adversarial_loss_dd(d.v[static_cast<std::size_t>(n)]) / d.n;
      Tensor gdi = s.discriminator->backward(gd);
      for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] += gdi.v[i];
      s.generator->net().zero_grads();
      s.generator->backward(g);
    }
    return generator_total(lp, {lc}, la, weights);
  };

  const double before = composite(true);
  Sgd sgd;
  sgd.step(s.generator->net().params(), 1e-6);
  const double after = composite(false);
  CHECK(after <= before + 1e-9);
}

TEST_CASE("checkpoints appear per epoch under component directories") {
  auto dir = std::filesystem::temp_directory_path() / "tracegan_train_ckpts";
  std::filesystem::remove_all(dir);
  MiniAttackSetup s(37);
  GanTrainCfg cfg;
  cfg.epochs = 2;
  cfg.steps_per_epoch = 1;
  cfg.batch = 2;
  train_attack(*s.generator, *s.discriminator, s.ensemble(), *s.source, cfg, 3, nullptr, dir,
               "test-hash");
  CHECK(std::filesystem::exists(dir / "generator" / "0.ckpt"));
  CHECK(std::filesystem::exists(dir / "generator" / "1.ckpt"));
  CHECK(std::filesystem::exists(dir / "discriminator" / "1.ckpt"));
  auto loaded = load_generator(dir / "generator" / "1.ckpt");
  CHECK(loaded->trained());
  std::filesystem::remove_all(dir);
}
