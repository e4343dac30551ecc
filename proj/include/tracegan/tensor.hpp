#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tracegan {

// Dense NCHW tensor of doubles. Feature vectors use (n, c, 1, 1).
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_), v(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {
    if (n_ < 0 || c_ < 0 || h_ < 0 || w_ < 0) throw std::invalid_argument("Tensor: bad shape");
  }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  std::size_t index(int i, int j, int y, int x) const {
    return ((static_cast<std::size_t>(i) * c + j) * h + y) * w + x;
  }
  double& at(int i, int j, int y, int x) { return v[index(i, j, y, x)]; }
  double at(int i, int j, int y, int x) const { return v[index(i, j, y, x)]; }

  void zero() { std::fill(v.begin(), v.end(), 0.0); }

  std::span<double> flat() { return {v.data(), v.size()}; }
  std::span<const double> flat() const { return {v.data(), v.size()}; }
};

}  // namespace tracegan
