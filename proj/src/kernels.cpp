#include "tracegan/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace tracegan::kernels {

namespace {

std::atomic<bool> g_parallel{true};

void check_conv_shapes(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                       const Tensor& out) {
  if (weight.h != weight.w || weight.h % 2 == 0)
    throw std::invalid_argument("conv2d: kernel must be square and odd");
  if (weight.c != in.c) throw std::invalid_argument("conv2d: channel mismatch");
  if (static_cast<int>(bias.size()) != weight.n)
    throw std::invalid_argument("conv2d: bias size mismatch");
  if (out.n != in.n || out.c != weight.n || out.h != in.h || out.w != in.w)
    throw std::invalid_argument("conv2d: output shape mismatch");
}

}  // namespace

void set_parallel_enabled(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

// ---------------------------------------------------------------------------
// conv2d forward

#define CONV2D_FORWARD_BODY(PRAGMA)                                                     \
  check_conv_shapes(in, weight, bias, out);                                             \
  const int N = in.n, Ci = in.c, H = in.h, W = in.w;                                    \
  const int Co = weight.n, K = weight.h, P = K / 2;                                     \
  PRAGMA                                                                                \
  for (int idx = 0; idx < N * Co; ++idx) {                                              \
    const int n = idx / Co, co = idx % Co;                                              \
    for (int y = 0; y < H; ++y) {                                                       \
      for (int x = 0; x < W; ++x) {                                                     \
        double acc = bias[co];                                                          \
        for (int ci = 0; ci < Ci; ++ci) {                                               \
          const double* wp = &weight.v[weight.index(co, ci, 0, 0)];                     \
          const double* ip = &in.v[in.index(n, ci, 0, 0)];                              \
          const int ky0 = y >= P ? 0 : P - y;                                           \
          const int ky1 = (y + K - P <= H) ? K : H - y + P;                             \
          const int kx0 = x >= P ? 0 : P - x;                                           \
          const int kx1 = (x + K - P <= W) ? K : W - x + P;                             \
          for (int ky = ky0; ky < ky1; ++ky) {                                          \
            const double* irow = ip + static_cast<std::size_t>(y + ky - P) * W;         \
            const double* wrow = wp + static_cast<std::size_t>(ky) * K;                 \
            for (int kx = kx0; kx < kx1; ++kx) acc += wrow[kx] * irow[x + kx - P];      \
          }                                                                             \
        }                                                                               \
        out.v[out.index(n, co, y, x)] = acc;                                            \
      }                                                                                 \
    }                                                                                   \
  }

void conv2d_forward_omp(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                        Tensor& out) {
  CONV2D_FORWARD_BODY(_Pragma("omp parallel for schedule(static)"))
}

void conv2d_forward_serial(const Tensor& in, const Tensor& weight,
                           std::span<const double> bias, Tensor& out) {
  CONV2D_FORWARD_BODY()
}

void conv2d_forward(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                    Tensor& out) {
  if (parallel_enabled())
    conv2d_forward_omp(in, weight, bias, out);
  else
    conv2d_forward_serial(in, weight, bias, out);
}

#undef CONV2D_FORWARD_BODY

// ---------------------------------------------------------------------------
// conv2d backward w.r.t. data
//   gin[n,ci,u,v] = sum_{co,ky,kx} w[co,ci,ky,kx] * gout[n,co, u-ky+P, v-kx+P]

#define CONV2D_BWD_DATA_BODY(PRAGMA)                                                    \
  const int N = grad_out.n, Co = grad_out.c, H = grad_out.h, W = grad_out.w;            \
  const int Ci = weight.c, K = weight.h, P = K / 2;                                     \
  if (grad_in.n != N || grad_in.c != Ci || grad_in.h != H || grad_in.w != W)            \
    throw std::invalid_argument("conv2d_backward_data: shape mismatch");                \
  PRAGMA                                                                                \
  for (int idx = 0; idx < N * Ci; ++idx) {                                              \
    const int n = idx / Ci, ci = idx % Ci;                                              \
    for (int u = 0; u < H; ++u) {                                                       \
      for (int v = 0; v < W; ++v) {                                                     \
        double acc = 0.0;                                                               \
        for (int co = 0; co < Co; ++co) {                                               \
          const double* wp = &weight.v[weight.index(co, ci, 0, 0)];                     \
          const double* gp = &grad_out.v[grad_out.index(n, co, 0, 0)];                  \
          for (int ky = 0; ky < K; ++ky) {                                              \
            const int y = u - ky + P;                                                   \
            if (y < 0 || y >= H) continue;                                              \
            const double* grow = gp + static_cast<std::size_t>(y) * W;                  \
            const double* wrow = wp + static_cast<std::size_t>(ky) * K;                 \
            for (int kx = 0; kx < K; ++kx) {                                            \
              const int x = v - kx + P;                                                 \
              if (x < 0 || x >= W) continue;                                            \
              acc += wrow[kx] * grow[x];                                                \
            }                                                                           \
          }                                                                             \
        }                                                                               \
        grad_in.v[grad_in.index(n, ci, u, v)] = acc;                                    \
      }                                                                                 \
    }                                                                                   \
  }

void conv2d_backward_data_omp(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in) {
  CONV2D_BWD_DATA_BODY(_Pragma("omp parallel for schedule(static)"))
}

void conv2d_backward_data_serial(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in) {
  CONV2D_BWD_DATA_BODY()
}

void conv2d_backward_data(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in) {
  if (parallel_enabled())
    conv2d_backward_data_omp(grad_out, weight, grad_in);
  else
    conv2d_backward_data_serial(grad_out, weight, grad_in);
}

#undef CONV2D_BWD_DATA_BODY

// ---------------------------------------------------------------------------
// conv2d backward w.r.t. weights
//   gw[co,ci,ky,kx] += sum_{n,y,x} gout[n,co,y,x] * in[n,ci, y+ky-P, x+kx-P]
//   gb[co]          += sum_{n,y,x} gout[n,co,y,x]

#define CONV2D_BWD_W_BODY(PRAGMA)                                                       \
  const int N = grad_out.n, Co = grad_out.c, H = grad_out.h, W = grad_out.w;            \
  const int Ci = in.c, K = grad_weight.h, P = K / 2;                                    \
  if (grad_weight.n != Co || grad_weight.c != Ci ||                                     \
      static_cast<int>(grad_bias.size()) != Co || in.n != N)                            \
    throw std::invalid_argument("conv2d_backward_weights: shape mismatch");             \
  PRAGMA                                                                                \
  for (int co = 0; co < Co; ++co) {                                                     \
    for (int ci = 0; ci < Ci; ++ci) {                                                   \
      for (int ky = 0; ky < K; ++ky) {                                                  \
        for (int kx = 0; kx < K; ++kx) {                                                \
          double acc = 0.0;                                                             \
          for (int n = 0; n < N; ++n) {                                                 \
            const double* gp = &grad_out.v[grad_out.index(n, co, 0, 0)];                \
            const double* ip = &in.v[in.index(n, ci, 0, 0)];                            \
            const int y0 = P - ky > 0 ? P - ky : 0;                                     \
            const int y1 = H + P - ky < H ? H + P - ky : H;                             \
            const int x0 = P - kx > 0 ? P - kx : 0;                                     \
            const int x1 = W + P - kx < W ? W + P - kx : W;                             \
            for (int y = y0; y < y1; ++y) {                                             \
              const double* grow = gp + static_cast<std::size_t>(y) * W;                \
              const double* irow = ip + static_cast<std::size_t>(y + ky - P) * W;       \
              for (int x = x0; x < x1; ++x) acc += grow[x] * irow[x + kx - P];          \
            }                                                                           \
          }                                                                             \
          grad_weight.v[grad_weight.index(co, ci, ky, kx)] += acc;                      \
        }                                                                               \
      }                                                                                 \
    }                                                                                   \
    double bacc = 0.0;                                                                  \
    for (int n = 0; n < N; ++n) {                                                       \
      const double* gp = &grad_out.v[grad_out.index(n, co, 0, 0)];                      \
      for (int i = 0; i < H * W; ++i) bacc += gp[i];                                    \
    }                                                                                   \
    grad_bias[co] += bacc;                                                              \
  }

void conv2d_backward_weights_omp(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                                 std::span<double> grad_bias) {
  CONV2D_BWD_W_BODY(_Pragma("omp parallel for schedule(static)"))
}

void conv2d_backward_weights_serial(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                                    std::span<double> grad_bias) {
  CONV2D_BWD_W_BODY()
}

void conv2d_backward_weights(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                             std::span<double> grad_bias) {
  if (parallel_enabled())
    conv2d_backward_weights_omp(grad_out, in, grad_weight, grad_bias);
  else
    conv2d_backward_weights_serial(grad_out, in, grad_weight, grad_bias);
}

#undef CONV2D_BWD_W_BODY

// ---------------------------------------------------------------------------
// dense

#define DENSE_FWD_BODY(PRAGMA)                                                          \
  const int N = in.n, I = in.c, O = weight.n;                                           \
  if (weight.c != I || static_cast<int>(bias.size()) != O || out.n != N || out.c != O)  \
    throw std::invalid_argument("dense: shape mismatch");                               \
  PRAGMA                                                                                \
  for (int n = 0; n < N; ++n) {                                                         \
    const double* ip = &in.v[static_cast<std::size_t>(n) * I];                          \
    double* op = &out.v[static_cast<std::size_t>(n) * O];                               \
    for (int o = 0; o < O; ++o) {                                                       \
      const double* wp = &weight.v[static_cast<std::size_t>(o) * I];                    \
      double acc = bias[o];                                                             \
      for (int i = 0; i < I; ++i) acc += wp[i] * ip[i];                                 \
      op[o] = acc;                                                                      \
    }                                                                                   \
  }

void dense_forward_omp(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                       Tensor& out) {
  DENSE_FWD_BODY(_Pragma("omp parallel for schedule(static)"))
}

void dense_forward_serial(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                          Tensor& out) {
  DENSE_FWD_BODY()
}

void dense_forward(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                   Tensor& out) {
  if (parallel_enabled())
    dense_forward_omp(in, weight, bias, out);
  else
    dense_forward_serial(in, weight, bias, out);
}

#undef DENSE_FWD_BODY

#define DENSE_BWD_DATA_BODY(PRAGMA)                                                     \
  const int N = grad_out.n, O = grad_out.c, I = weight.c;                               \
  if (weight.n != O || grad_in.n != N || grad_in.c != I)                                \
    throw std::invalid_argument("dense_backward_data: shape mismatch");                 \
  PRAGMA                                                                                \
  for (int n = 0; n < N; ++n) {                                                         \
    const double* gp = &grad_out.v[static_cast<std::size_t>(n) * O];                    \
    double* dp = &grad_in.v[static_cast<std::size_t>(n) * I];                           \
    for (int i = 0; i < I; ++i) {                                                       \
      double acc = 0.0;                                                                 \
      for (int o = 0; o < O; ++o) acc += weight.v[static_cast<std::size_t>(o) * I + i] * gp[o]; \
      dp[i] = acc;                                                                      \
    }                                                                                   \
  }

void dense_backward_data_omp(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in) {
  DENSE_BWD_DATA_BODY(_Pragma("omp parallel for schedule(static)"))
}

void dense_backward_data_serial(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in) {
  DENSE_BWD_DATA_BODY()
}

void dense_backward_data(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in) {
  if (parallel_enabled())
    dense_backward_data_omp(grad_out, weight, grad_in);
  else
    dense_backward_data_serial(grad_out, weight, grad_in);
}

#undef DENSE_BWD_DATA_BODY

#define DENSE_BWD_W_BODY(PRAGMA)                                                        \
  const int N = grad_out.n, O = grad_out.c, I = in.c;                                   \
  if (grad_weight.n != O || grad_weight.c != I ||                                       \
      static_cast<int>(grad_bias.size()) != O || in.n != N)                             \
    throw std::invalid_argument("dense_backward_weights: shape mismatch");              \
  PRAGMA                                                                                \
  for (int o = 0; o < O; ++o) {                                                         \
    double* wp = &grad_weight.v[static_cast<std::size_t>(o) * I];                       \
    double bacc = 0.0;                                                                  \
    for (int n = 0; n < N; ++n) {                                                       \
      const double g = grad_out.v[static_cast<std::size_t>(n) * O + o];                 \
      const double* ip = &in.v[static_cast<std::size_t>(n) * I];                        \
      for (int i = 0; i < I; ++i) wp[i] += g * ip[i];                                   \
      bacc += g;                                                                        \
    }                                                                                   \
    grad_bias[o] += bacc;                                                               \
  }

void dense_backward_weights_omp(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                                std::span<double> grad_bias) {
  DENSE_BWD_W_BODY(_Pragma("omp parallel for schedule(static)"))
}

void dense_backward_weights_serial(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                                   std::span<double> grad_bias) {
  DENSE_BWD_W_BODY()
}

void dense_backward_weights(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                            std::span<double> grad_bias) {
  if (parallel_enabled())
    dense_backward_weights_omp(grad_out, in, grad_weight, grad_bias);
  else
    dense_backward_weights_serial(grad_out, in, grad_weight, grad_bias);
}

#undef DENSE_BWD_W_BODY

}  // namespace tracegan::kernels
