#pragma once

#include <vector>

#include "tracegan/layers.hpp"

namespace tracegan {

enum class LrSchedule { HalveEvery4Epochs, Decay10PctEvery5000Iters };

// piecewise-constant step decay; the epoch schedule uses lr0 * 0.5^(e/4),
// the iteration schedule lr0 * 0.9^(it/5000)
double lr_at(double lr0, LrSchedule schedule, long epoch, long iteration);

class Sgd {
 public:
  void step(const std::vector<Param*>& params, double lr);
};

class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(const std::vector<Param*>& params, double lr);

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace tracegan
