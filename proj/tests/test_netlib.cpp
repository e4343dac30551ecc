#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>

#include "tracegan/checkpoint.hpp"
#include "tracegan/kernels.hpp"
#include "tracegan/layers.hpp"
#include "tracegan/losses.hpp"
#include "tracegan/nets.hpp"
#include "tracegan/rng.hpp"

using namespace tracegan;

namespace {

Tensor random_unit_tensor(int n, int c, int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(n, c, h, w);
  for (double& v : t.v) v = rng.uniform();
  return t;
}

ImageBuffer random_unit_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer img(h, w, PixelScale::Unit);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

// central finite differences against the analytic gradient on sampled
// parameters; the 1e-6 floor keeps the ratio meaningful for near-zero pairs
void check_param_gradients(Net& net, const std::function<double()>& loss_value,
                           const std::function<void()>& run_backward, int samples,
                           std::uint64_t seed, double tol = 1e-4) {
  net.zero_grads();
  run_backward();
  std::vector<Param*> params = net.params();

  Rng pick(seed);
  const double h = 1e-5;
  for (int s = 0; s < samples; ++s) {
    Param* p = params[pick.uniform_int(params.size())];
    if (!p->trainable || p->value.size() == 0) continue;
    const std::size_t i = pick.uniform_int(p->value.size());
    const double saved = p->value.v[i];
    p->value.v[i] = saved + h;
    const double up = loss_value();
    p->value.v[i] = saved - h;
    const double down = loss_value();
    p->value.v[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double analytic = p->grad.v[i];
    const double rel =
        std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6});
    CAPTURE(p->name);
    CAPTURE(analytic);
    CAPTURE(fd);
    CHECK(rel < tol);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// constrained projection

TEST_CASE("projection of an all-ones 5x5 filter") {
  Tensor bank(1, 1, 5, 5);
  for (double& v : bank.v) v = 1.0;
  CHECK(constrained_conv_project(bank) == 0);
  CHECK(bank.at(0, 0, 2, 2) == -1.0);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x)
      if (y != 2 || x != 2) CHECK(bank.at(0, 0, y, x) == doctest::Approx(1.0 / 24).epsilon(1e-12));
}

TEST_CASE("projection is idempotent on satisfying filters") {
  Rng rng(4);
  Tensor bank(2, 3, 5, 5);
  for (double& v : bank.v) v = rng.uniform() + 0.1;
  constrained_conv_project(bank);
  Tensor again = bank;
  constrained_conv_project(again);
  for (std::size_t i = 0; i < bank.v.size(); ++i)
    CHECK(bank.v[i] == doctest::Approx(again.v[i]).epsilon(1e-12));
}

TEST_CASE("projection normalizes random banks") {
  Rng rng(9);
  Tensor bank(3, 2, 3, 3);
  for (double& v : bank.v) v = 2.0 * rng.uniform() - 1.0;
  constrained_conv_project(bank);
  for (int co = 0; co < 3; ++co)
    for (int ci = 0; ci < 2; ++ci) {
      CHECK(bank.at(co, ci, 1, 1) == -1.0);
      double off = 0.0;
      for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x)
          if (y != 1 || x != 1) off += bank.at(co, ci, y, x);
      CHECK(off == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("projection reinitializes degenerate filters and reports them") {
  Tensor bank(1, 1, 3, 3);  // all zeros: off-center sum ~ 0
  const int fixed = constrained_conv_project(bank);
  CHECK(fixed == 1);
  CHECK(bank.at(0, 0, 1, 1) == -1.0);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x)
      if (y != 1 || x != 1) CHECK(bank.at(0, 0, y, x) == doctest::Approx(1.0 / 8).epsilon(1e-12));
}

TEST_CASE("projection rejects even kernels and bad centers") {
  Tensor even(1, 1, 4, 4);
  CHECK_THROWS(constrained_conv_project(even));
  Tensor ok(1, 1, 3, 3);
  CHECK_THROWS(constrained_conv_project(ok, 3, 0));
}

// ---------------------------------------------------------------------------
// generator

TEST_CASE("generator preserves shape for any input size, primes included") {
  Generator gen(GeneratorCfg{4, 6}, 11);
  for (auto [h, w] : {std::pair{8, 8}, std::pair{17, 23}, std::pair{1, 1}, std::pair{5, 31}}) {
    Tensor out = gen.forward(random_unit_tensor(1, 3, h, w, 3), false);
    CHECK(out.n == 1);
    CHECK(out.c == 3);
    CHECK(out.h == h);
    CHECK(out.w == w);
    for (double v : out.v) {
      CHECK(v >= 0.0);  // rectified final activation
      CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("generator_forward keeps image dims and scale") {
  Generator gen(GeneratorCfg{4, 4}, 2);
  ImageBuffer img = random_unit_image(19, 13, 5);
  ImageBuffer out = generator_forward(gen, img);
  CHECK(out.height == 19);
  CHECK(out.width == 13);
  CHECK(out.scale == PixelScale::Unit);
}

TEST_CASE("generator rejects non-3-channel tensors") {
  Generator gen(GeneratorCfg{4, 4}, 2);
  CHECK_THROWS(gen.forward(Tensor(1, 4, 8, 8), false));
}

TEST_CASE("zeroed reduction layer yields an all-zero output") {
  Generator gen(GeneratorCfg{4, 4}, 7);
  auto params = gen.net().params();
  // the reduction conv owns the last weight/bias pair
  params[params.size() - 2]->value.zero();
  params[params.size() - 1]->value.zero();
  Tensor out = gen.forward(random_unit_tensor(2, 3, 9, 9, 1), false);
  for (double v : out.v) CHECK(v == 0.0);
}

// ---------------------------------------------------------------------------
// discriminator

TEST_CASE("discriminator output lies strictly inside (0,1)") {
  DiscriminatorCfg cfg{16, 3, {4, 4, 4, 4}, 8, 8};
  Discriminator disc(cfg, 3);
  Tensor out = disc.forward(random_unit_tensor(3, 3, 16, 16, 8), false);
  CHECK(out.n == 3);
  CHECK(out.c == 1);
  for (double v : out.v) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("zero final layer gives 0.5") {
  DiscriminatorCfg cfg{16, 3, {4, 4, 4, 4}, 8, 8};
  Discriminator disc(cfg, 3);
  auto params = disc.net().params();
  params[params.size() - 2]->value.zero();  // final dense weight
  params[params.size() - 1]->value.zero();  // final dense bias
  ImageBuffer patch = random_unit_image(16, 16, 4);
  CHECK(discriminator_forward(disc, patch) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("duplicate patches in one batch agree in inference mode") {
  DiscriminatorCfg cfg{16, 3, {4, 4, 4, 4}, 8, 8};
  Discriminator disc(cfg, 19);
  Tensor batch(4, 3, 16, 16);
  Tensor one = random_unit_tensor(1, 3, 16, 16, 21);
  for (int n = 0; n < 4; ++n)
    for (std::size_t i = 0; i < one.v.size(); ++i)
      batch.v[static_cast<std::size_t>(n) * one.v.size() + i] = one.v[i];
  Tensor out = disc.forward(batch, false);  // running statistics
  for (int n = 1; n < 4; ++n) CHECK(out.v[static_cast<std::size_t>(n)] == out.v[0]);
}

TEST_CASE("discriminator rejects wrong shapes") {
  DiscriminatorCfg cfg{16, 3, {4, 4, 4, 4}, 8, 8};
  Discriminator disc(cfg, 3);
  CHECK_THROWS(disc.forward(Tensor(1, 3, 8, 8), false));
  ImageBuffer small(8, 8, PixelScale::Unit);
  CHECK_THROWS(discriminator_forward(disc, small));
}

// ---------------------------------------------------------------------------
// surrogates

TEST_CASE("every architecture emits softmax rows on the simplex") {
  for (Architecture arch : all_architectures()) {
    SurrogateCfg cfg;
    cfg.arch = arch;
    cfg.num_classes = 4;
    cfg.input_size = 16;
    cfg.width = 4;
    cfg.fc = 8;
    Surrogate net(cfg, 100 + static_cast<int>(arch));
    Tensor out = net.forward(random_unit_tensor(3, 3, 16, 16, 5), false);
    REQUIRE(out.c == 4);
    for (int n = 0; n < out.n; ++n) {
      double sum = 0.0;
      for (int k = 0; k < out.c; ++k) {
        CHECK(out.at(n, k, 0, 0) >= 0.0);
        sum += out.at(n, k, 0, 0);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("zero logits give the uniform distribution") {
  SurrogateCfg cfg;
  cfg.arch = Architecture::PlainConv;
  cfg.num_classes = 5;
  cfg.input_size = 8;
  cfg.width = 4;
  cfg.fc = 8;
  Surrogate net(cfg, 6);
  auto params = net.net().params();
  params[params.size() - 2]->value.zero();
  params[params.size() - 1]->value.zero();
  std::vector<double> probs = surrogate_forward(net, random_unit_image(8, 8, 2));
  for (double p : probs) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("argmax is consistent with the serial reference path") {
  SurrogateCfg cfg;
  cfg.arch = Architecture::ConstrainedFront;
  cfg.num_classes = 3;
  cfg.input_size = 16;
  cfg.width = 4;
  cfg.fc = 8;
  Surrogate net(cfg, 15);
  Tensor in = random_unit_tensor(2, 3, 16, 16, 33);

  Tensor fast = net.forward(in, false);
  kernels::set_parallel_enabled(false);
  Tensor ref = net.forward(in, false);
  kernels::set_parallel_enabled(true);

  for (int n = 0; n < 2; ++n) {
    int a = 0, b = 0;
    for (int k = 1; k < 3; ++k) {
      if (fast.at(n, k, 0, 0) > fast.at(n, a, 0, 0)) a = k;
      if (ref.at(n, k, 0, 0) > ref.at(n, b, 0, 0)) b = k;
    }
    CHECK(a == b);
    for (int k = 0; k < 3; ++k) CHECK(fast.at(n, k, 0, 0) == ref.at(n, k, 0, 0));
  }
}

TEST_CASE("surrogate rejects wrong input shapes") {
  SurrogateCfg cfg;
  cfg.arch = Architecture::PlainConv;
  cfg.num_classes = 2;
  cfg.input_size = 16;
  cfg.width = 4;
  cfg.fc = 8;
  Surrogate net(cfg, 1);
  CHECK_THROWS(net.forward(Tensor(1, 3, 8, 8), false));
}

TEST_CASE("highpass front is fixed, zero-sum and not trainable") {
  FixedHighpass front;
  std::vector<Param*> params;
  front.collect_params(params);
  CHECK(params.empty());
  // zero-sum taps: flat input maps to zero away from the padded border
  Tensor flat(1, 3, 12, 12);
  for (double& v : flat.v) v = 0.7;
  Tensor out = front.forward(flat, false);
  for (int ch = 0; ch < 3; ++ch)
    for (int y = 2; y < 10; ++y)
      for (int x = 2; x < 10; ++x)
        CHECK(out.at(0, ch, y, x) == doctest::Approx(0.0).epsilon(1e-12));
  // depthwise: each output channel reacts only to its own input channel
  Tensor impulse(1, 3, 12, 12);
  impulse.at(0, 1, 6, 6) = 1.0;
  Tensor resp = front.forward(impulse, false);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) {
      CHECK(resp.at(0, 0, y, x) == 0.0);
      CHECK(resp.at(0, 2, y, x) == 0.0);
    }
  CHECK(resp.at(0, 1, 6, 6) == doctest::Approx(-1.0).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// checkpoints

TEST_CASE("checkpoints round-trip parameters and running stats") {
  auto dir = std::filesystem::temp_directory_path() / "tracegan_ckpt_test";
  std::filesystem::create_directories(dir);

  SurrogateCfg cfg;
  cfg.arch = Architecture::ResidualStyle;
  cfg.num_classes = 4;
  cfg.input_size = 16;
  cfg.width = 4;
  cfg.fc = 8;
  Surrogate net(cfg, 77);
  // drift the batch-norm running stats away from their init
  net.forward(random_unit_tensor(4, 3, 16, 16, 3), true);

  save_surrogate(net, dir / "s.ckpt", "cfg-hash-1");
  auto loaded = load_surrogate(dir / "s.ckpt");
  CHECK(loaded->net().param_hash() == net.net().param_hash());
  CHECK(loaded->cfg().arch == Architecture::ResidualStyle);

  Tensor in = random_unit_tensor(2, 3, 16, 16, 9);
  Tensor a = net.forward(in, false);
  Tensor b = loaded->forward(in, false);
  CHECK(a.v == b.v);

  CHECK(checkpoint_component(dir / "s.ckpt") == "surrogate");
  CHECK_THROWS(load_generator(dir / "s.ckpt"));

  Generator gen(GeneratorCfg{4, 4}, 5);
  gen.mark_trained();
  save_generator(gen, dir / "g.ckpt", "cfg-hash-2");
  auto gen2 = load_generator(dir / "g.ckpt");
  CHECK(gen2->trained());
  CHECK(gen2->net().param_hash() == gen.net().param_hash());

  std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------
// gradient fidelity on miniature nets

TEST_CASE("surrogate gradients match finite differences") {
  for (Architecture arch : {Architecture::ConstrainedFront, Architecture::HighpassFront,
                            Architecture::PlainConv, Architecture::DenseStyle,
                            Architecture::DeepVggStyle, Architecture::ResidualStyle}) {
    SurrogateCfg cfg;
    cfg.arch = arch;
    cfg.num_classes = 3;
    cfg.input_size = 8;
    cfg.width = 2;
    cfg.fc = 4;
    Surrogate net(cfg, 1000 + static_cast<int>(arch));
    Tensor in = random_unit_tensor(2, 3, 8, 8, 19);

    auto loss_value = [&]() {
      Tensor probs = net.forward(in, true);
      double loss = 0.0;
      for (int n = 0; n < probs.n; ++n)
        loss += classification_loss({probs.at(n, 0, 0, 0), probs.at(n, 1, 0, 0),
                                     probs.at(n, 2, 0, 0)},
                                    0);
      return loss / probs.n;
    };
    auto run_backward = [&]() {
      Tensor probs = net.forward(in, true);
      Tensor g(probs.n, probs.c, 1, 1);
      for (int n = 0; n < probs.n; ++n)
        g.at(n, 0, 0, 0) = d_classification_loss_dprob(probs.at(n, 0, 0, 0)) / probs.n;
      net.backward(g);
    };
    CAPTURE(architecture_name(arch));
    check_param_gradients(net.net(), loss_value, run_backward, 25,
                          500 + static_cast<int>(arch));
  }
}

TEST_CASE("generator gradients through the perceptual loss match finite differences") {
  Generator gen(GeneratorCfg{2, 2}, 41);
  // zero-bias init leaves many pre-activations exactly at the relu kink;
  // jitter every parameter so the finite-difference probes stay one-sided
  {
    Rng jitter(97);
    for (Param* p : gen.net().params())
      for (double& v : p->value.v) v += 0.1 * (jitter.uniform() - 0.5);
  }
  Tensor in = random_unit_tensor(2, 3, 8, 8, 23);
  // a target above the output range keeps |g - t| away from its kink
  Tensor target = random_unit_tensor(2, 3, 8, 8, 29);
  for (double& v : target.v) v += 2.0;

  auto loss_value = [&]() { return perceptual_loss(target, gen.forward(in, true)); };
  auto run_backward = [&]() {
    Tensor out = gen.forward(in, true);
    Tensor g(out.n, out.c, out.h, out.w);
    const double norm = static_cast<double>(out.n) * out.h * out.w;
    for (std::size_t i = 0; i < g.v.size(); ++i) {
      const double d = out.v[i] - target.v[i];
      g.v[i] = (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) / norm;
    }
    gen.backward(g);
  };
  check_param_gradients(gen.net(), loss_value, run_backward, 40, 600);
}

TEST_CASE("discriminator gradients match finite differences") {
  DiscriminatorCfg cfg{16, 2, {2, 2, 2, 2}, 4, 4};
  Discriminator disc(cfg, 47);
  Tensor real = random_unit_tensor(2, 3, 16, 16, 31);
  Tensor fake = random_unit_tensor(2, 3, 16, 16, 37);

  // -L_D on a fixed (real, fake) pair, batch statistics in play
  auto loss_value = [&]() {
    Tensor dr = disc.forward(real, true);
    Tensor df = disc.forward(fake, true);
    double loss = 0.0;
    for (int n = 0; n < dr.n; ++n)
      loss -= discriminator_loss(dr.v[static_cast<std::size_t>(n)],
                                 df.v[static_cast<std::size_t>(n)]);
    return loss / dr.n;
  };
  auto run_backward = [&]() {
    Tensor dr = disc.forward(real, true);
    Tensor g_real(dr.n, 1, 1, 1);
    for (int n = 0; n < dr.n; ++n)
      g_real.v[static_cast<std::size_t>(n)] =
          -d_discriminator_loss_dreal(dr.v[static_cast<std::size_t>(n)]) / dr.n;
    disc.backward(g_real);
    Tensor df = disc.forward(fake, true);
    Tensor g_fake(df.n, 1, 1, 1);
    for (int n = 0; n < df.n; ++n)
      g_fake.v[static_cast<std::size_t>(n)] =
          -d_discriminator_loss_dfake(df.v[static_cast<std::size_t>(n)]) / df.n;
    disc.backward(g_fake);
  };
  // forward order (real then fake) matters for the running stats only, not
  // the training-mode loss value
  check_param_gradients(disc.net(), loss_value, run_backward, 40, 700);
}

TEST_CASE("batch-norm training and inference modes differ as designed") {
  BatchNorm2d bn(2);
  Rng rng(3);
  Tensor x(4, 2, 3, 3);
  for (double& v : x.v) v = rng.uniform() * 4.0 - 2.0;
  Tensor train_out = bn.forward(x, true);
  // per-channel batch stats: normalized output has ~zero mean
  for (int c = 0; c < 2; ++c) {
    double mean = 0.0;
    for (int n = 0; n < 4; ++n)
      for (int i = 0; i < 9; ++i) mean += train_out.v[train_out.index(n, c, 0, 0) + i];
    CHECK(std::abs(mean / 36.0) < 1e-12);
  }
  // inference right after init uses running stats, not batch stats
  BatchNorm2d fresh(2);
  Tensor eval_out = fresh.forward(x, false);
  double diff = 0.0;
  for (std::size_t i = 0; i < x.v.size(); ++i) diff += std::abs(eval_out.v[i] - x.v[i]);
  CHECK(diff / x.v.size() < 1e-3);  // gamma=1, beta=0, running stats near (0,1)
}
