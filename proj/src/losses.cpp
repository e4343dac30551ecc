#include "tracegan/losses.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace tracegan {

namespace {
// floor only: -log(1) must stay exactly 0, the floor guards the -inf side
double clamp_prob(double p) {
  if (p < kProbEps) return kProbEps;
  if (p > 1.0) return 1.0;
  return p;
}
bool in_clamp_range(double p) { return p > kProbEps && p <= 1.0; }
}  // namespace

double perceptual_loss(const ImageBuffer& unaltered, const ImageBuffer& generated) {
  if (!unaltered.same_shape(generated))
    throw std::invalid_argument("perceptual_loss: dimension mismatch");
  if (unaltered.scale != generated.scale)
    throw std::invalid_argument("perceptual_loss: scale mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < unaltered.data.size(); ++i)
    acc += std::abs(unaltered.data[i] - generated.data[i]);
  return acc / static_cast<double>(unaltered.pixel_count());
}

double perceptual_loss(const Tensor& target, const Tensor& generated) {
  if (!target.same_shape(generated))
    throw std::invalid_argument("perceptual_loss: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < target.v.size(); ++i)
    acc += std::abs(target.v[i] - generated.v[i]);
  return acc / (static_cast<double>(target.n) * target.h * target.w);
}

double classification_loss(const std::vector<double>& softmax, int unaltered_index) {
  if (unaltered_index < 0 || unaltered_index >= static_cast<int>(softmax.size()))
    throw std::invalid_argument("classification_loss: index out of range");
  return -std::log(clamp_prob(softmax[static_cast<std::size_t>(unaltered_index)]));
}

double adversarial_loss(double d_out) {
  if (!(d_out >= 0.0 && d_out <= 1.0))
    throw std::invalid_argument("adversarial_loss: d_out outside [0,1]");
  return std::log(clamp_prob(1.0 - d_out));
}

double adversarial_loss_nonsaturating(double d_out) {
  if (!(d_out >= 0.0 && d_out <= 1.0))
    throw std::invalid_argument("adversarial_loss: d_out outside [0,1]");
  return -std::log(clamp_prob(d_out));
}

double generator_total(double perceptual, const std::vector<double>& classification,
                       double adversarial, const LossWeights& weights) {
  if (classification.size() != weights.betas.size())
    throw std::invalid_argument("generator_total: classification/beta length mismatch");
  double total = weights.alpha * perceptual;
  for (std::size_t s = 0; s < classification.size(); ++s)
    total += weights.betas[s] * classification[s];
  total += weights.gamma * adversarial;
  return total;
}

double discriminator_loss(double d_real, double d_fake) {
  if (!(d_real >= 0.0 && d_real <= 1.0) || !(d_fake >= 0.0 && d_fake <= 1.0))
    throw std::invalid_argument("discriminator_loss: inputs outside [0,1]");
  return std::log(clamp_prob(d_real)) + std::log(clamp_prob(1.0 - d_fake));
}

double d_classification_loss_dprob(double p) {
  return in_clamp_range(p) ? -1.0 / p : 0.0;
}

double d_adversarial_loss_dd(double d_out) {
  return in_clamp_range(1.0 - d_out) ? -1.0 / (1.0 - d_out) : 0.0;
}

double d_adversarial_loss_nonsaturating_dd(double d_out) {
  return in_clamp_range(d_out) ? -1.0 / d_out : 0.0;
}

double d_discriminator_loss_dreal(double d_real) {
  return in_clamp_range(d_real) ? 1.0 / d_real : 0.0;
}

double d_discriminator_loss_dfake(double d_fake) {
  return in_clamp_range(1.0 - d_fake) ? -1.0 / (1.0 - d_fake) : 0.0;
}

void write_metrics_header(std::ostream& out, std::size_t num_surrogates) {
  out << "step,L_p";
  for (std::size_t s = 0; s < num_surrogates; ++s) out << ",L_c" << (s + 1);
  out << ",L_a,L_G,L_D\n";
}

void write_metrics_line(std::ostream& out, long step, const LossReport& report) {
  out << step << ',' << report.perceptual;
  for (double c : report.classification) out << ',' << c;
  out << ',' << report.adversarial << ',' << report.generator_total << ','
      << report.discriminator << '\n';
}

}  // namespace tracegan
