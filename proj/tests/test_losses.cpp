#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tracegan/losses.hpp"
#include "tracegan/rng.hpp"

using namespace tracegan;

TEST_CASE("perceptual loss of identical images is zero") {
  ImageBuffer a(5, 7, PixelScale::Unit, 0.25);
  CHECK(perceptual_loss(a, a) == 0.0);
}

TEST_CASE("perceptual loss sums the three channels inside the per-pixel term") {
  ImageBuffer zeros(4, 4, PixelScale::Unit, 0.0);
  ImageBuffer ones(4, 4, PixelScale::Unit, 1.0);
  CHECK(perceptual_loss(zeros, ones) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("perceptual loss matches an elementwise oracle on fixed buffers") {
  Rng rng(1301);
  ImageBuffer a(4, 4, PixelScale::Unit), b(4, 4, PixelScale::Unit);
  for (double& v : a.data) v = rng.uniform();
  for (double& v : b.data) v = rng.uniform();
  double acc = 0.0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      for (int ch = 0; ch < 3; ++ch) acc += std::abs(a.at(r, c, ch) - b.at(r, c, ch));
  acc /= 16.0;
  CHECK(perceptual_loss(a, b) == doctest::Approx(acc).epsilon(1e-15));
}

TEST_CASE("perceptual loss rejects mismatched inputs") {
  ImageBuffer a(4, 4, PixelScale::Unit), b(4, 5, PixelScale::Unit);
  CHECK_THROWS(perceptual_loss(a, b));
  ImageBuffer c(4, 4, PixelScale::Byte);
  CHECK_THROWS(perceptual_loss(a, c));
}

TEST_CASE("classification loss on point mass and uniform softmax") {
  CHECK(classification_loss({1.0, 0.0}, 0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(classification_loss({0.25, 0.25, 0.25, 0.25}, 0) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(classification_loss({0.7, 0.2, 0.1}, 0) ==
        doctest::Approx(-std::log(0.7)).epsilon(1e-12));
  CHECK(classification_loss({0.7, 0.2, 0.1}, 0) == doctest::Approx(0.356675).epsilon(1e-6));
}

TEST_CASE("classification loss is clamped and validates the index") {
  CHECK(classification_loss({0.0, 1.0}, 0) == doctest::Approx(-std::log(kProbEps)));
  CHECK_THROWS(classification_loss({0.5, 0.5}, 2));
  CHECK_THROWS(classification_loss({0.5, 0.5}, -1));
}

TEST_CASE("classification loss is nonnegative and zero only at certainty") {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    double p = rng.uniform();
    double loss = classification_loss({p, 1.0 - p}, 0);
    CHECK(loss >= 0.0);
    if (p < 1.0 - kProbEps) CHECK(loss > 0.0);
  }
}

TEST_CASE("adversarial loss follows Eq. 6 semantics") {
  CHECK(adversarial_loss(0.5) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(adversarial_loss(0.5) == doctest::Approx(-0.693147).epsilon(1e-6));
  // d -> 1: strongly negative, clamped at log(eps)
  CHECK(adversarial_loss(1.0) == doctest::Approx(std::log(kProbEps)));
  // d -> 0: ~ log 1 = 0
  CHECK(adversarial_loss(0.0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK_THROWS(adversarial_loss(1.5));
  CHECK_THROWS(adversarial_loss(-0.1));
}

TEST_CASE("non-saturating variant dives as d -> 0") {
  CHECK(adversarial_loss_nonsaturating(0.5) == doctest::Approx(-std::log(0.5)));
  CHECK(adversarial_loss_nonsaturating(1.0) == 0.0);
  CHECK(adversarial_loss_nonsaturating(0.0) == doctest::Approx(-std::log(kProbEps)));
}

TEST_CASE("generator total composes the weighted sum") {
  LossWeights w;
  w.betas = {1.0, 1.0};
  CHECK(generator_total(0.1, {0.2, 0.3}, -0.5, w) == doctest::Approx(0.1).epsilon(1e-12));

  // gamma 0 makes the total independent of the adversarial term
  w.gamma = 0.0;
  CHECK(generator_total(0.1, {0.2, 0.3}, -0.5, w) ==
        doctest::Approx(generator_total(0.1, {0.2, 0.3}, 123.0, w)).epsilon(1e-12));

  LossWeights defaults;
  CHECK(defaults.alpha == 1.0);
  CHECK(defaults.gamma == 1.0);
  REQUIRE(defaults.betas.size() == 1);
  CHECK(defaults.betas[0] == 1.0);

  CHECK_THROWS(generator_total(0.0, {0.1}, 0.0, w));  // length mismatch
}

TEST_CASE("doubling alpha doubles exactly the perceptual contribution") {
  LossWeights w;
  w.betas = {1.0};
  const double lp = 0.37, la = -0.21;
  const std::vector<double> lc = {0.9};
  const double base = generator_total(lp, lc, la, w);
  w.alpha = 2.0;
  const double doubled = generator_total(lp, lc, la, w);
  CHECK(doubled - base == doctest::Approx(lp).epsilon(1e-12));
}

TEST_CASE("discriminator loss limits and midpoint") {
  const double eps = 1e-9;
  CHECK(discriminator_loss(1.0 - eps, eps) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(discriminator_loss(0.5, 0.5) == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-12));
  CHECK(discriminator_loss(0.5, 0.5) == doctest::Approx(-1.386294).epsilon(1e-6));
  CHECK_THROWS(discriminator_loss(1.2, 0.5));
  CHECK_THROWS(discriminator_loss(0.5, -0.2));
}

TEST_CASE("discriminator loss equals the per-sample minmax objective") {
  // Eq. 7 is the bracketed Eq. 2 objective on one (real, fake) sample
  Rng rng(77);
  for (int i = 0; i < 20; ++i) {
    double dr = 0.05 + 0.9 * rng.uniform();
    double df = 0.05 + 0.9 * rng.uniform();
    CHECK(discriminator_loss(dr, df) ==
          doctest::Approx(std::log(dr) + std::log(1.0 - df)).epsilon(1e-9));
  }
}

TEST_CASE("loss derivative helpers match finite differences") {
  Rng rng(303);
  const double h = 1e-7;
  for (int i = 0; i < 25; ++i) {
    double p = 0.05 + 0.9 * rng.uniform();
    double fd = (classification_loss({p + h, 1 - p - h}, 0) -
                 classification_loss({p - h, 1 - p + h}, 0)) /
                (2 * h);
    CHECK(d_classification_loss_dprob(p) == doctest::Approx(fd).epsilon(1e-4));

    double d = 0.05 + 0.9 * rng.uniform();
    fd = (adversarial_loss(d + h) - adversarial_loss(d - h)) / (2 * h);
    CHECK(d_adversarial_loss_dd(d) == doctest::Approx(fd).epsilon(1e-4));

    fd = (discriminator_loss(d + h, 0.5) - discriminator_loss(d - h, 0.5)) / (2 * h);
    CHECK(d_discriminator_loss_dreal(d) == doctest::Approx(fd).epsilon(1e-4));

    fd = (discriminator_loss(0.5, d + h) - discriminator_loss(0.5, d - h)) / (2 * h);
    CHECK(d_discriminator_loss_dfake(d) == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("metrics log lines carry every loss term") {
  std::ostringstream out;
  write_metrics_header(out, 2);
  LossReport r;
  r.perceptual = 0.5;
  r.classification = {1.25, 0.75};
  r.adversarial = -0.25;
  r.generator_total = 2.25;
  r.discriminator = -1.5;
  write_metrics_line(out, 7, r);
  CHECK(out.str() == "step,L_p,L_c1,L_c2,L_a,L_G,L_D\n7,0.5,1.25,0.75,-0.25,2.25,-1.5\n");
}

TEST_CASE("loss report total identity") {
  // the report's total uses the same arithmetic path as generator_total
  LossWeights w;
  w.alpha = 0.5;
  w.betas = {2.0, 0.25};
  w.gamma = 3.0;
  LossReport r;
  r.perceptual = 0.125;
  r.classification = {0.5, 4.0};
  r.adversarial = -0.5;
  r.generator_total = generator_total(r.perceptual, r.classification, r.adversarial, w);
  CHECK(r.generator_total ==
        w.alpha * r.perceptual + w.betas[0] * r.classification[0] +
            w.betas[1] * r.classification[1] + w.gamma * r.adversarial);
}
