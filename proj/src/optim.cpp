#include "tracegan/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace tracegan {

double lr_at(double lr0, LrSchedule schedule, long epoch, long iteration) {
  if (epoch < 0 || iteration < 0) throw std::invalid_argument("lr_at: negative epoch/iteration");
  switch (schedule) {
    case LrSchedule::HalveEvery4Epochs:
      return lr0 * std::pow(0.5, static_cast<double>(epoch / 4));
    case LrSchedule::Decay10PctEvery5000Iters:
      return lr0 * std::pow(0.9, static_cast<double>(iteration / 5000));
  }
  throw std::logic_error("bad LrSchedule");
}

void Sgd::step(const std::vector<Param*>& params, double lr) {
  for (Param* p : params) {
    if (!p->trainable) continue;
    for (std::size_t i = 0; i < p->value.v.size(); ++i) p->value.v[i] -= lr * p->grad.v[i];
  }
}

void Adam::step(const std::vector<Param*>& params, double lr) {
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i]->value.v.size(), 0.0);
      v_[i].assign(params[i]->value.v.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::logic_error("Adam: param set changed");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param* p = params[i];
    if (!p->trainable) continue;
    for (std::size_t k = 0; k < p->value.v.size(); ++k) {
      const double g = p->grad.v[k];
      m_[i][k] = beta1_ * m_[i][k] + (1.0 - beta1_) * g;
      v_[i][k] = beta2_ * v_[i][k] + (1.0 - beta2_) * g * g;
      const double mhat = m_[i][k] / bc1;
      const double vhat = v_[i][k] / bc2;
      p->value.v[k] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace tracegan
