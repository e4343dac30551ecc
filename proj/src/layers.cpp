#include "tracegan/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tracegan/hashing.hpp"
#include "tracegan/kernels.hpp"

namespace tracegan {

using nlohmann::json;

namespace {
bool g_grad_enabled = true;

void xavier_uniform(Tensor& t, int fan_in, int fan_out, Rng& rng) {
  double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : t.v) v = (2.0 * rng.uniform() - 1.0) * limit;
}
}  // namespace

void set_grad_enabled(bool enabled) { g_grad_enabled = enabled; }
bool grad_enabled() { return g_grad_enabled; }

json tensor_to_json(const Tensor& t) {
  return json{{"shape", {t.n, t.c, t.h, t.w}}, {"data", t.v}};
}

Tensor tensor_from_json(const json& j) {
  auto shape = j.at("shape");
  Tensor t(shape.at(0).get<int>(), shape.at(1).get<int>(), shape.at(2).get<int>(),
           shape.at(3).get<int>());
  t.v = j.at("data").get<std::vector<double>>();
  if (t.v.size() != static_cast<std::size_t>(t.n) * t.c * t.h * t.w)
    throw std::runtime_error("tensor_from_json: data size mismatch");
  return t;
}

// ---------------------------------------------------------------------------
// constrained projection

int constrained_conv_project(Tensor& bank, int center_row, int center_col) {
  const int k = bank.h;
  if (bank.h != bank.w || k % 2 == 0)
    throw std::invalid_argument("constrained_conv_project: kernel must be square and odd");
  if (center_row < 0 || center_row >= k || center_col < 0 || center_col >= k)
    throw std::invalid_argument("constrained_conv_project: center outside kernel");
  int reinitialized = 0;
  for (int co = 0; co < bank.n; ++co) {
    for (int ci = 0; ci < bank.c; ++ci) {
      double sum = 0.0;
      for (int y = 0; y < k; ++y)
        for (int x = 0; x < k; ++x)
          if (y != center_row || x != center_col) sum += bank.at(co, ci, y, x);
      if (std::abs(sum) < 1e-8) {
        const double uniform = 1.0 / (k * k - 1);
        for (int y = 0; y < k; ++y)
          for (int x = 0; x < k; ++x)
            if (y != center_row || x != center_col) bank.at(co, ci, y, x) = uniform;
        ++reinitialized;
      } else {
        const double scale = 1.0 / sum;
        for (int y = 0; y < k; ++y)
          for (int x = 0; x < k; ++x)
            if (y != center_row || x != center_col) bank.at(co, ci, y, x) *= scale;
      }
      bank.at(co, ci, center_row, center_col) = -1.0;
    }
  }
  return reinitialized;
}

int constrained_conv_project(Tensor& bank) {
  return constrained_conv_project(bank, bank.h / 2, bank.w / 2);
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_c, int out_c, int ksize) : in_c_(in_c), out_c_(out_c), ksize_(ksize) {
  if (ksize < 1 || ksize % 2 == 0) throw std::invalid_argument("Conv2d: odd kernel required");
  weight_ = {"weight", Tensor(out_c, in_c, ksize, ksize), Tensor(out_c, in_c, ksize, ksize), true};
  bias_ = {"bias", Tensor(out_c, 1, 1, 1), Tensor(out_c, 1, 1, 1), true};
}

Tensor Conv2d::forward(const Tensor& x, bool) {
  if (x.c != in_c_) throw std::invalid_argument("Conv2d: channel mismatch");
  Tensor out(x.n, out_c_, x.h, x.w);
  kernels::conv2d_forward(x, weight_.value, bias_.value.flat(), out);
  if (grad_enabled()) cached_in_ = x;
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  kernels::conv2d_backward_weights(grad_out, cached_in_, weight_.grad, bias_.grad.flat());
  Tensor grad_in(cached_in_.n, cached_in_.c, cached_in_.h, cached_in_.w);
  kernels::conv2d_backward_data(grad_out, weight_.value, grad_in);
  return grad_in;
}

void Conv2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

void Conv2d::init_params(Rng& rng) {
  xavier_uniform(weight_.value, in_c_ * ksize_ * ksize_, out_c_ * ksize_ * ksize_, rng);
  bias_.value.zero();
}

void Conv2d::save_state(json& j) const {
  j["weight"] = tensor_to_json(weight_.value);
  j["bias"] = tensor_to_json(bias_.value);
}

void Conv2d::load_state(const json& j) {
  Tensor w = tensor_from_json(j.at("weight"));
  Tensor b = tensor_from_json(j.at("bias"));
  if (!w.same_shape(weight_.value) || !b.same_shape(bias_.value))
    throw std::runtime_error("Conv2d: checkpoint shape mismatch");
  weight_.value = std::move(w);
  bias_.value = std::move(b);
}

ConstrainedConv2d::ConstrainedConv2d(int in_c, int out_c, int ksize)
    : Conv2d(in_c, out_c, ksize) {}

void ConstrainedConv2d::init_params(Rng& rng) {
  Conv2d::init_params(rng);
  constrained_conv_project(weight_.value);
}

int ConstrainedConv2d::project_constraints() {
  return constrained_conv_project(weight_.value);
}

// ---------------------------------------------------------------------------
// FixedHighpass: second-order residual filter, scaled by 1/12

FixedHighpass::FixedHighpass() : weight_(3, 3, 5, 5), zero_bias_(3, 0.0) {
  static const double kv[5][5] = {{-1, 2, -2, 2, -1},
                                  {2, -6, 8, -6, 2},
                                  {-2, 8, -12, 8, -2},
                                  {2, -6, 8, -6, 2},
                                  {-1, 2, -2, 2, -1}};
  for (int ch = 0; ch < 3; ++ch)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x) weight_.at(ch, ch, y, x) = kv[y][x] / 12.0;
}

Tensor FixedHighpass::forward(const Tensor& x, bool) {
  if (x.c != 3) throw std::invalid_argument("FixedHighpass: expects 3 channels");
  Tensor out(x.n, 3, x.h, x.w);
  kernels::conv2d_forward(x, weight_, zero_bias_, out);
  return out;
}

Tensor FixedHighpass::backward(const Tensor& grad_out) {
  Tensor grad_in(grad_out.n, 3, grad_out.h, grad_out.w);
  kernels::conv2d_backward_data(grad_out, weight_, grad_in);
  return grad_in;
}

void FixedHighpass::save_state(json& j) const { j["fixed"] = true; }
void FixedHighpass::load_state(const json&) {}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(int in_f, int out_f) : in_f_(in_f), out_f_(out_f) {
  weight_ = {"weight", Tensor(out_f, in_f, 1, 1), Tensor(out_f, in_f, 1, 1), true};
  bias_ = {"bias", Tensor(out_f, 1, 1, 1), Tensor(out_f, 1, 1, 1), true};
}

Tensor Dense::forward(const Tensor& x, bool) {
  if (x.c != in_f_ || x.h != 1 || x.w != 1)
    throw std::invalid_argument("Dense: expects (n, in_features, 1, 1)");
  Tensor out(x.n, out_f_, 1, 1);
  kernels::dense_forward(x, weight_.value, bias_.value.flat(), out);
  if (grad_enabled()) cached_in_ = x;
  return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
  kernels::dense_backward_weights(grad_out, cached_in_, weight_.grad, bias_.grad.flat());
  Tensor grad_in(cached_in_.n, in_f_, 1, 1);
  kernels::dense_backward_data(grad_out, weight_.value, grad_in);
  return grad_in;
}

void Dense::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

void Dense::init_params(Rng& rng) {
  xavier_uniform(weight_.value, in_f_, out_f_, rng);
  bias_.value.zero();
}

void Dense::save_state(json& j) const {
  j["weight"] = tensor_to_json(weight_.value);
  j["bias"] = tensor_to_json(bias_.value);
}

void Dense::load_state(const json& j) {
  Tensor w = tensor_from_json(j.at("weight"));
  Tensor b = tensor_from_json(j.at("bias"));
  if (!w.same_shape(weight_.value) || !b.same_shape(bias_.value))
    throw std::runtime_error("Dense: checkpoint shape mismatch");
  weight_.value = std::move(w);
  bias_.value = std::move(b);
}

// ---------------------------------------------------------------------------
// activations

Tensor ReLU::forward(const Tensor& x, bool) {
  Tensor out = x;
  for (double& v : out.v)
    if (v < 0.0) v = 0.0;
  if (grad_enabled()) cached_in_ = x;
  return out;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  Tensor grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.v.size(); ++i)
    if (cached_in_.v[i] <= 0.0) grad_in.v[i] = 0.0;
  return grad_in;
}

Tensor Tanh::forward(const Tensor& x, bool) {
  Tensor out = x;
  for (double& v : out.v) v = std::tanh(v);
  if (grad_enabled()) cached_out_ = out;
  return out;
}

Tensor Tanh::backward(const Tensor& grad_out) {
  Tensor grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.v.size(); ++i)
    grad_in.v[i] *= 1.0 - cached_out_.v[i] * cached_out_.v[i];
  return grad_in;
}

Tensor Sigmoid::forward(const Tensor& x, bool) {
  Tensor out = x;
  for (double& v : out.v) {
    v = 1.0 / (1.0 + std::exp(-v));
    // keep the score strictly inside (0,1)
    if (v < 1e-12) v = 1e-12;
    if (v > 1.0 - 1e-12) v = 1.0 - 1e-12;
  }
  if (grad_enabled()) cached_out_ = out;
  return out;
}

Tensor Sigmoid::backward(const Tensor& grad_out) {
  Tensor grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.v.size(); ++i)
    grad_in.v[i] *= cached_out_.v[i] * (1.0 - cached_out_.v[i]);
  return grad_in;
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps) {
  gamma_ = {"gamma", Tensor(channels, 1, 1, 1), Tensor(channels, 1, 1, 1), true};
  beta_ = {"beta", Tensor(channels, 1, 1, 1), Tensor(channels, 1, 1, 1), true};
  for (double& v : gamma_.value.v) v = 1.0;
  running_mean_.assign(channels, 0.0);
  running_var_.assign(channels, 1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool training) {
  if (x.c != channels_) throw std::invalid_argument("BatchNorm2d: channel mismatch");
  const int N = x.n, H = x.h, W = x.w;
  const double m = static_cast<double>(N) * H * W;
  Tensor out(N, channels_, H, W);
  Tensor xhat(N, channels_, H, W);
  std::vector<double> inv_std(channels_);

  for (int c = 0; c < channels_; ++c) {
    double mean, var;
    if (training) {
      double sum = 0.0, sum2 = 0.0;
      for (int n = 0; n < N; ++n) {
        const double* p = &x.v[x.index(n, c, 0, 0)];
        for (int i = 0; i < H * W; ++i) {
          sum += p[i];
          sum2 += p[i] * p[i];
        }
      }
      mean = sum / m;
      var = sum2 / m - mean * mean;
      if (var < 0.0) var = 0.0;
      if (update_running_) {
        running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
        running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * var;
      }
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const double is = 1.0 / std::sqrt(var + eps_);
    inv_std[c] = is;
    const double g = gamma_.value.v[c], b = beta_.value.v[c];
    for (int n = 0; n < N; ++n) {
      const double* p = &x.v[x.index(n, c, 0, 0)];
      double* xh = &xhat.v[xhat.index(n, c, 0, 0)];
      double* o = &out.v[out.index(n, c, 0, 0)];
      for (int i = 0; i < H * W; ++i) {
        xh[i] = (p[i] - mean) * is;
        o[i] = g * xh[i] + b;
      }
    }
  }
  if (grad_enabled()) {
    cached_xhat_ = std::move(xhat);
    cached_inv_std_ = std::move(inv_std);
    cached_training_ = training;
  }
  return out;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
  const int N = grad_out.n, H = grad_out.h, W = grad_out.w;
  const double m = static_cast<double>(N) * H * W;
  Tensor grad_in(N, channels_, H, W);

  for (int c = 0; c < channels_; ++c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (int n = 0; n < N; ++n) {
      const double* g = &grad_out.v[grad_out.index(n, c, 0, 0)];
      const double* xh = &cached_xhat_.v[cached_xhat_.index(n, c, 0, 0)];
      for (int i = 0; i < H * W; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * xh[i];
      }
    }
    gamma_.grad.v[c] += sum_gx;
    beta_.grad.v[c] += sum_g;

    const double gam = gamma_.value.v[c];
    const double is = cached_inv_std_[c];
    for (int n = 0; n < N; ++n) {
      const double* g = &grad_out.v[grad_out.index(n, c, 0, 0)];
      const double* xh = &cached_xhat_.v[cached_xhat_.index(n, c, 0, 0)];
      double* gi = &grad_in.v[grad_in.index(n, c, 0, 0)];
      if (cached_training_) {
        for (int i = 0; i < H * W; ++i)
          gi[i] = gam * is * (g[i] - sum_g / m - xh[i] * sum_gx / m);
      } else {
        for (int i = 0; i < H * W; ++i) gi[i] = gam * is * g[i];
      }
    }
  }
  return grad_in;
}

void BatchNorm2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

void BatchNorm2d::save_state(json& j) const {
  j["gamma"] = tensor_to_json(gamma_.value);
  j["beta"] = tensor_to_json(beta_.value);
  j["running_mean"] = running_mean_;
  j["running_var"] = running_var_;
}

void BatchNorm2d::load_state(const json& j) {
  gamma_.value = tensor_from_json(j.at("gamma"));
  beta_.value = tensor_from_json(j.at("beta"));
  running_mean_ = j.at("running_mean").get<std::vector<double>>();
  running_var_ = j.at("running_var").get<std::vector<double>>();
  if (static_cast<int>(running_mean_.size()) != channels_ ||
      static_cast<int>(running_var_.size()) != channels_ || gamma_.value.n != channels_)
    throw std::runtime_error("BatchNorm2d: checkpoint shape mismatch");
}

// ---------------------------------------------------------------------------
// MaxPool2d

MaxPool2d::MaxPool2d(int size) : size_(size) {
  if (size < 1) throw std::invalid_argument("MaxPool2d: size must be >= 1");
}

Tensor MaxPool2d::forward(const Tensor& x, bool) {
  const int oh = x.h / size_, ow = x.w / size_;
  if (oh < 1 || ow < 1) throw std::invalid_argument("MaxPool2d: input smaller than window");
  Tensor out(x.n, x.c, oh, ow);
  argmax_.assign(out.size(), 0);
  for (int n = 0; n < x.n; ++n)
    for (int c = 0; c < x.c; ++c)
      for (int y = 0; y < oh; ++y)
        for (int xo = 0; xo < ow; ++xo) {
          double best = -1e300;
          std::size_t best_idx = 0;
          for (int dy = 0; dy < size_; ++dy)
            for (int dx = 0; dx < size_; ++dx) {
              std::size_t idx = x.index(n, c, y * size_ + dy, xo * size_ + dx);
              if (x.v[idx] > best) {
                best = x.v[idx];
                best_idx = idx;
              }
            }
          out.at(n, c, y, xo) = best;
          argmax_[out.index(n, c, y, xo)] = best_idx;
        }
  in_n_ = x.n;
  in_c_ = x.c;
  in_h_ = x.h;
  in_w_ = x.w;
  return out;
}

Tensor MaxPool2d::backward(const Tensor& grad_out) {
  Tensor grad_in(in_n_, in_c_, in_h_, in_w_);
  for (std::size_t i = 0; i < grad_out.v.size(); ++i) grad_in.v[argmax_[i]] += grad_out.v[i];
  return grad_in;
}

// ---------------------------------------------------------------------------
// Flatten / Softmax

Tensor Flatten::forward(const Tensor& x, bool) {
  c_ = x.c;
  h_ = x.h;
  w_ = x.w;
  Tensor out(x.n, x.c * x.h * x.w, 1, 1);
  out.v = x.v;
  return out;
}

Tensor Flatten::backward(const Tensor& grad_out) {
  Tensor grad_in(grad_out.n, c_, h_, w_);
  grad_in.v = grad_out.v;
  return grad_in;
}

Tensor Softmax::forward(const Tensor& x, bool) {
  if (x.h != 1 || x.w != 1) throw std::invalid_argument("Softmax: expects (n, K, 1, 1)");
  Tensor out = x;
  for (int n = 0; n < x.n; ++n) {
    double* p = &out.v[static_cast<std::size_t>(n) * x.c];
    double mx = p[0];
    for (int k = 1; k < x.c; ++k) mx = std::max(mx, p[k]);
    double sum = 0.0;
    for (int k = 0; k < x.c; ++k) {
      p[k] = std::exp(p[k] - mx);
      sum += p[k];
    }
    for (int k = 0; k < x.c; ++k) p[k] /= sum;
  }
  if (grad_enabled()) cached_out_ = out;
  return out;
}

Tensor Softmax::backward(const Tensor& grad_out) {
  Tensor grad_in = grad_out;
  const int K = grad_out.c;
  for (int n = 0; n < grad_out.n; ++n) {
    const double* y = &cached_out_.v[static_cast<std::size_t>(n) * K];
    const double* g = &grad_out.v[static_cast<std::size_t>(n) * K];
    double dot = 0.0;
    for (int k = 0; k < K; ++k) dot += y[k] * g[k];
    double* gi = &grad_in.v[static_cast<std::size_t>(n) * K];
    for (int k = 0; k < K; ++k) gi[k] = y[k] * (g[k] - dot);
  }
  return grad_in;
}

// ---------------------------------------------------------------------------
// composite blocks

ResidualBlock::ResidualBlock(int channels) {
  branch_.push_back(std::make_unique<Conv2d>(channels, channels, 3));
  branch_.push_back(std::make_unique<BatchNorm2d>(channels));
  branch_.push_back(std::make_unique<ReLU>());
  branch_.push_back(std::make_unique<Conv2d>(channels, channels, 3));
  branch_.push_back(std::make_unique<BatchNorm2d>(channels));
}

Tensor ResidualBlock::forward(const Tensor& x, bool training) {
  Tensor y = x;
  for (auto& l : branch_) y = l->forward(y, training);
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += x.v[i];
  if (grad_enabled()) cached_sum_ = y;
  Tensor out = y;
  for (double& v : out.v)
    if (v < 0.0) v = 0.0;
  return out;
}

Tensor ResidualBlock::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.v.size(); ++i)
    if (cached_sum_.v[i] <= 0.0) g.v[i] = 0.0;
  Tensor gb = g;
  for (auto it = branch_.rbegin(); it != branch_.rend(); ++it) gb = (*it)->backward(gb);
  for (std::size_t i = 0; i < gb.v.size(); ++i) gb.v[i] += g.v[i];
  return gb;
}

void ResidualBlock::collect_params(std::vector<Param*>& out) {
  for (auto& l : branch_) l->collect_params(out);
}

void ResidualBlock::init_params(Rng& rng) {
  for (auto& l : branch_) l->init_params(rng);
}

void ResidualBlock::save_state(json& j) const {
  json arr = json::array();
  for (const auto& l : branch_) {
    json s;
    l->save_state(s);
    arr.push_back({{"kind", l->kind()}, {"state", s}});
  }
  j["branch"] = arr;
}

void ResidualBlock::load_state(const json& j) {
  const auto& arr = j.at("branch");
  if (arr.size() != branch_.size()) throw std::runtime_error("ResidualBlock: layer count mismatch");
  for (std::size_t i = 0; i < branch_.size(); ++i) {
    if (arr[i].at("kind").get<std::string>() != branch_[i]->kind())
      throw std::runtime_error("ResidualBlock: layer kind mismatch");
    branch_[i]->load_state(arr[i].at("state"));
  }
}

void ResidualBlock::set_bn_update(bool enabled) {
  for (auto& l : branch_) l->set_bn_update(enabled);
}

ConcatGrowth::ConcatGrowth(int in_c, int growth) : in_c_(in_c), growth_(growth) {
  branch_.push_back(std::make_unique<Conv2d>(in_c, growth, 3));
  branch_.push_back(std::make_unique<BatchNorm2d>(growth));
  branch_.push_back(std::make_unique<ReLU>());
}

Tensor ConcatGrowth::forward(const Tensor& x, bool training) {
  Tensor y = x;
  for (auto& l : branch_) y = l->forward(y, training);
  Tensor out(x.n, in_c_ + growth_, x.h, x.w);
  for (int n = 0; n < x.n; ++n) {
    std::copy(&x.v[x.index(n, 0, 0, 0)], &x.v[x.index(n, 0, 0, 0)] + static_cast<std::size_t>(in_c_) * x.h * x.w,
              &out.v[out.index(n, 0, 0, 0)]);
    std::copy(&y.v[y.index(n, 0, 0, 0)], &y.v[y.index(n, 0, 0, 0)] + static_cast<std::size_t>(growth_) * x.h * x.w,
              &out.v[out.index(n, in_c_, 0, 0)]);
  }
  return out;
}

Tensor ConcatGrowth::backward(const Tensor& grad_out) {
  const int h = grad_out.h, w = grad_out.w;
  Tensor g_branch(grad_out.n, growth_, h, w);
  Tensor g_direct(grad_out.n, in_c_, h, w);
  for (int n = 0; n < grad_out.n; ++n) {
    std::copy(&grad_out.v[grad_out.index(n, 0, 0, 0)],
              &grad_out.v[grad_out.index(n, 0, 0, 0)] + static_cast<std::size_t>(in_c_) * h * w,
              &g_direct.v[g_direct.index(n, 0, 0, 0)]);
    std::copy(&grad_out.v[grad_out.index(n, in_c_, 0, 0)],
              &grad_out.v[grad_out.index(n, in_c_, 0, 0)] + static_cast<std::size_t>(growth_) * h * w,
              &g_branch.v[g_branch.index(n, 0, 0, 0)]);
  }
  Tensor gb = g_branch;
  for (auto it = branch_.rbegin(); it != branch_.rend(); ++it) gb = (*it)->backward(gb);
  for (std::size_t i = 0; i < gb.v.size(); ++i) gb.v[i] += g_direct.v[i];
  return gb;
}

void ConcatGrowth::collect_params(std::vector<Param*>& out) {
  for (auto& l : branch_) l->collect_params(out);
}

void ConcatGrowth::init_params(Rng& rng) {
  for (auto& l : branch_) l->init_params(rng);
}

void ConcatGrowth::save_state(json& j) const {
  json arr = json::array();
  for (const auto& l : branch_) {
    json s;
    l->save_state(s);
    arr.push_back({{"kind", l->kind()}, {"state", s}});
  }
  j["branch"] = arr;
}

void ConcatGrowth::load_state(const json& j) {
  const auto& arr = j.at("branch");
  if (arr.size() != branch_.size()) throw std::runtime_error("ConcatGrowth: layer count mismatch");
  for (std::size_t i = 0; i < branch_.size(); ++i) {
    if (arr[i].at("kind").get<std::string>() != branch_[i]->kind())
      throw std::runtime_error("ConcatGrowth: layer kind mismatch");
    branch_[i]->load_state(arr[i].at("state"));
  }
}

void ConcatGrowth::set_bn_update(bool enabled) {
  for (auto& l : branch_) l->set_bn_update(enabled);
}

// ---------------------------------------------------------------------------
// Net

Layer* Net::add(std::unique_ptr<Layer> layer) {
  layers_.push_back(std::move(layer));
  return layers_.back().get();
}

Tensor Net::forward(const Tensor& x, bool training) {
  Tensor y = x;
  for (auto& l : layers_) y = l->forward(y, training);
  return y;
}

Tensor Net::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<Param*> Net::params() {
  std::vector<Param*> out;
  for (auto& l : layers_) l->collect_params(out);
  return out;
}

void Net::zero_grads() {
  for (Param* p : params()) p->grad.zero();
}

void Net::init_params(Rng& rng) {
  for (auto& l : layers_) l->init_params(rng);
}

int Net::project_constraints() {
  int n = 0;
  for (auto& l : layers_) n += l->project_constraints();
  return n;
}

void Net::set_bn_update(bool enabled) {
  for (auto& l : layers_) l->set_bn_update(enabled);
}

std::uint64_t Net::param_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& l : layers_) {
    std::vector<Param*> ps;
    const_cast<Layer*>(l.get())->collect_params(ps);
    for (const Param* p : ps) h = fnv1a(p->value.v.data(), p->value.v.size() * sizeof(double), h);
  }
  return h;
}

std::size_t Net::param_count() {
  std::size_t n = 0;
  for (Param* p : params()) n += p->value.size();
  return n;
}

json Net::save_state() const {
  json arr = json::array();
  for (const auto& l : layers_) {
    json s;
    l->save_state(s);
    arr.push_back({{"kind", l->kind()}, {"state", s}});
  }
  return json{{"layers", arr}};
}

void Net::load_state(const json& j) {
  const auto& arr = j.at("layers");
  if (arr.size() != layers_.size())
    throw std::runtime_error("Net: checkpoint layer count mismatch");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (arr[i].at("kind").get<std::string>() != layers_[i]->kind())
      throw std::runtime_error("Net: checkpoint layer kind mismatch at index " +
                               std::to_string(i));
    layers_[i]->load_state(arr[i].at("state"));
  }
}

}  // namespace tracegan
