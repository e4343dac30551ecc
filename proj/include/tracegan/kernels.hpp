#pragma once

#include <span>

#include "tracegan/tensor.hpp"

namespace tracegan::kernels {

// Hot inner loops of the layer stack. Every kernel comes in two variants: the
// OpenMP one used by the layers and a serial reference used by tests and the
// benchmark. Each output element is owned by exactly one iteration, so the
// two variants produce bit-identical results.
//
// Convolutions are cross-correlations with zero "same" padding, stride 1:
//   out[n,co,y,x] = bias[co]
//     + sum_{ci,ky,kx} w[co,ci,ky,kx] * in[n,ci, y+ky-P, x+kx-P]
// with P = k/2 and odd k.

// when false, the dispatching entry points below run the serial variant
void set_parallel_enabled(bool enabled);
bool parallel_enabled();

void conv2d_forward_omp(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                        Tensor& out);
void conv2d_forward_serial(const Tensor& in, const Tensor& weight,
                           std::span<const double> bias, Tensor& out);
void conv2d_forward(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                    Tensor& out);

void conv2d_backward_data_omp(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in);
void conv2d_backward_data_serial(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in);
void conv2d_backward_data(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in);

// accumulates into grad_weight / grad_bias
void conv2d_backward_weights_omp(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                                 std::span<double> grad_bias);
void conv2d_backward_weights_serial(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                                    std::span<double> grad_bias);
void conv2d_backward_weights(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                             std::span<double> grad_bias);

// dense: out[n,o] = bias[o] + sum_i w[o,i] * in[n,i]; tensors are (n,f,1,1)
void dense_forward_omp(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                       Tensor& out);
void dense_forward_serial(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                          Tensor& out);
void dense_forward(const Tensor& in, const Tensor& weight, std::span<const double> bias,
                   Tensor& out);

void dense_backward_data_omp(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in);
void dense_backward_data_serial(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in);
void dense_backward_data(const Tensor& grad_out, const Tensor& weight, Tensor& grad_in);

void dense_backward_weights_omp(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                                std::span<double> grad_bias);
void dense_backward_weights_serial(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                                   std::span<double> grad_bias);
void dense_backward_weights(const Tensor& grad_out, const Tensor& in, Tensor& grad_weight,
                            std::span<double> grad_bias);

}  // namespace tracegan::kernels
