// Timing comparison between the OpenMP kernels and their serial reference on
// layer shapes the trainers actually use.

#include <chrono>
#include <cstdio>
#include <omp.h>

#include "tracegan/kernels.hpp"
#include "tracegan/rng.hpp"

using namespace tracegan;
using Clock = std::chrono::steady_clock;

namespace {

Tensor random_tensor(int n, int c, int h, int w, Rng& rng) {
  Tensor t(n, c, h, w);
  for (double& v : t.v) v = 2.0 * rng.uniform() - 1.0;
  return t;
}

template <typename F>
double time_ms(F&& fn, int reps) {
  fn();  // warm up
  const auto start = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto stop = Clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

struct Case {
  const char* name;
  int n, ci, co, hw, k, reps;
};

}  // namespace

int main() {
  Rng rng(1);
  const Case cases[] = {
      {"gen block 32px", 10, 16, 16, 32, 3, 5},
      {"gen block 64px", 4, 32, 32, 64, 3, 3},
      {"front 5x5 32px", 25, 3, 8, 32, 5, 5},
      {"body 3x3 16px", 25, 8, 8, 16, 3, 10},
  };

  std::printf("%-16s %12s %12s %12s %8s\n", "case", "kernel", "serial ms", "omp ms", "speedup");
  for (const Case& c : cases) {
    Tensor in = random_tensor(c.n, c.ci, c.hw, c.hw, rng);
    Tensor w = random_tensor(c.co, c.ci, c.k, c.k, rng);
    std::vector<double> bias(c.co, 0.1);
    Tensor out(c.n, c.co, c.hw, c.hw);
    Tensor gout = random_tensor(c.n, c.co, c.hw, c.hw, rng);
    Tensor gin(c.n, c.ci, c.hw, c.hw);
    Tensor gw(c.co, c.ci, c.k, c.k);
    std::vector<double> gb(c.co, 0.0);

    double ser = time_ms([&] { kernels::conv2d_forward_serial(in, w, bias, out); }, c.reps);
    double omp = time_ms([&] { kernels::conv2d_forward_omp(in, w, bias, out); }, c.reps);
    std::printf("%-16s %12s %12.3f %12.3f %7.2fx\n", c.name, "fwd", ser, omp, ser / omp);

    ser = time_ms([&] { kernels::conv2d_backward_data_serial(gout, w, gin); }, c.reps);
    omp = time_ms([&] { kernels::conv2d_backward_data_omp(gout, w, gin); }, c.reps);
    std::printf("%-16s %12s %12.3f %12.3f %7.2fx\n", c.name, "bwd-data", ser, omp, ser / omp);

    ser = time_ms([&] { kernels::conv2d_backward_weights_serial(gout, in, gw, gb); }, c.reps);
    omp = time_ms([&] { kernels::conv2d_backward_weights_omp(gout, in, gw, gb); }, c.reps);
    std::printf("%-16s %12s %12.3f %12.3f %7.2fx\n", c.name, "bwd-w", ser, omp, ser / omp);
  }

  {
    Tensor in = random_tensor(25, 2048, 1, 1, rng);
    Tensor w = random_tensor(200, 2048, 1, 1, rng);
    std::vector<double> bias(200, 0.0);
    Tensor out(25, 200, 1, 1);
    double ser = time_ms([&] { kernels::dense_forward_serial(in, w, bias, out); }, 20);
    double omp = time_ms([&] { kernels::dense_forward_omp(in, w, bias, out); }, 20);
    std::printf("%-16s %12s %12.3f %12.3f %7.2fx\n", "dense 2048->200", "fwd", ser, omp,
                ser / omp);
  }

  std::printf("threads: %d\n", omp_get_max_threads());
  return 0;
}
