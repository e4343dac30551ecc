#pragma once

#include <iosfwd>
#include <vector>

#include "tracegan/image.hpp"
#include "tracegan/tensor.hpp"

namespace tracegan {

// probabilities are clamped to [kProbEps, 1 - kProbEps] before any log
inline constexpr double kProbEps = 1e-7;

struct LossWeights {
  double alpha = 1.0;
  std::vector<double> betas = {1.0};  // one per surrogate
  double gamma = 1.0;
};

struct LossReport {
  double perceptual = 0.0;
  std::vector<double> classification;
  double adversarial = 0.0;
  double generator_total = 0.0;
  double discriminator = 0.0;
};

// mean absolute pixel difference, per-pixel term summed over the 3 channels
// and averaged over w*h
double perceptual_loss(const ImageBuffer& unaltered, const ImageBuffer& generated);
double perceptual_loss(const Tensor& target, const Tensor& generated);

// -log softmax[unaltered_index], clamped
double classification_loss(const std::vector<double>& softmax, int unaltered_index);

// log(1 - d_out), clamped; the generator minimizes this, driving d_out -> 1.
// The non-saturating -log(d_out) alternative sits behind a config flag.
double adversarial_loss(double d_out);
double adversarial_loss_nonsaturating(double d_out);

// alpha*L_p + sum_s beta_s*L_c[s] + gamma*L_a
double generator_total(double perceptual, const std::vector<double>& classification,
                       double adversarial, const LossWeights& weights);

// log d_real + log(1 - d_fake); maximized by the discriminator, so trainers
// minimize its negation
double discriminator_loss(double d_real, double d_fake);

// derivative helpers matching the clamped losses (zero outside the clamp range)
double d_classification_loss_dprob(double prob_at_unaltered);
double d_adversarial_loss_dd(double d_out);
double d_adversarial_loss_nonsaturating_dd(double d_out);
double d_discriminator_loss_dreal(double d_real);
double d_discriminator_loss_dfake(double d_fake);

// one line per training step: step, L_p, each L_c^(s), L_a, L_G, L_D
void write_metrics_header(std::ostream& out, std::size_t num_surrogates);
void write_metrics_line(std::ostream& out, long step, const LossReport& report);

}  // namespace tracegan
