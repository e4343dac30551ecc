#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracegan/rng.hpp"
#include "tracegan/tensor.hpp"

namespace tracegan {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
};

// Trainers cache activations for backprop; inference paths (full-image
// attacks, evaluation) turn caching off to keep memory flat.
void set_grad_enabled(bool enabled);
bool grad_enabled();

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, bool training) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual void collect_params(std::vector<Param*>& out) { (void)out; }
  virtual void init_params(Rng& rng) { (void)rng; }
  virtual std::string kind() const = 0;
  virtual void save_state(nlohmann::json& j) const { (void)j; }
  virtual void load_state(const nlohmann::json& j) { (void)j; }
  virtual void set_bn_update(bool enabled) { (void)enabled; }
  // constrained-front hook; returns number of reinitialized filters
  virtual int project_constraints() { return 0; }
};

nlohmann::json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const nlohmann::json& j);

// Projects a filter bank so that for every 2-D kernel slice the weight at
// `center` is -1 and the remaining weights sum to 1. Slices whose off-center
// weights sum to ~0 (|sum| < 1e-8) are reinitialized to uniform 1/(k*k-1);
// the return value counts those reinitializations.
int constrained_conv_project(Tensor& bank, int center_row, int center_col);
int constrained_conv_project(Tensor& bank);  // center defaults to (k/2, k/2)

class Conv2d : public Layer {
 public:
  Conv2d(int in_c, int out_c, int ksize);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;
  void init_params(Rng& rng) override;
  std::string kind() const override { return "conv2d"; }
  void save_state(nlohmann::json& j) const override;
  void load_state(const nlohmann::json& j) override;

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 protected:
  int in_c_, out_c_, ksize_;
  Param weight_, bias_;
  Tensor cached_in_;
};

// Prediction-error front: projected after construction and after every
// optimizer step by the trainers.
class ConstrainedConv2d : public Conv2d {
 public:
  ConstrainedConv2d(int in_c, int out_c, int ksize);
  std::string kind() const override { return "constrained_conv2d"; }
  void init_params(Rng& rng) override;
  int project_constraints() override;
};

// Three identical fixed 5x5 high-pass filters, one per channel, non-trainable.
class FixedHighpass : public Layer {
 public:
  FixedHighpass();
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "fixed_highpass"; }
  void save_state(nlohmann::json& j) const override;
  void load_state(const nlohmann::json& j) override;

 private:
  Tensor weight_;
  std::vector<double> zero_bias_;
};

class Dense : public Layer {
 public:
  Dense(int in_f, int out_f);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;
  void init_params(Rng& rng) override;
  std::string kind() const override { return "dense"; }
  void save_state(nlohmann::json& j) const override;
  void load_state(const nlohmann::json& j) override;

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  int in_f_, out_f_;
  Param weight_, bias_;
  Tensor cached_in_;
};

class ReLU : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "relu"; }

 private:
  Tensor cached_in_;
};

class Tanh : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "tanh"; }

 private:
  Tensor cached_out_;
};

class Sigmoid : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "sigmoid"; }

 private:
  Tensor cached_out_;
};

class BatchNorm2d : public Layer {
 public:
  explicit BatchNorm2d(int channels, double momentum = 0.1, double eps = 1e-5);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;
  std::string kind() const override { return "batchnorm2d"; }
  void save_state(nlohmann::json& j) const override;
  void load_state(const nlohmann::json& j) override;
  void set_bn_update(bool enabled) override { update_running_ = enabled; }

 private:
  int channels_;
  double momentum_, eps_;
  bool update_running_ = true;
  Param gamma_, beta_;
  std::vector<double> running_mean_, running_var_;
  // backward caches
  Tensor cached_xhat_;
  std::vector<double> cached_inv_std_;
  bool cached_training_ = false;
};

class MaxPool2d : public Layer {
 public:
  explicit MaxPool2d(int size = 2);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "maxpool2d"; }

 private:
  int size_;
  int in_n_ = 0, in_c_ = 0, in_h_ = 0, in_w_ = 0;
  std::vector<std::size_t> argmax_;
};

class Flatten : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "flatten"; }

 private:
  int c_ = 0, h_ = 0, w_ = 0;
};

// channel softmax for (n, K, 1, 1)
class Softmax : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "softmax"; }

 private:
  Tensor cached_out_;
};

// conv-bn-relu-conv-bn with identity skip, relu after the join
class ResidualBlock : public Layer {
 public:
  explicit ResidualBlock(int channels);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;
  void init_params(Rng& rng) override;
  std::string kind() const override { return "residual_block"; }
  void save_state(nlohmann::json& j) const override;
  void load_state(const nlohmann::json& j) override;
  void set_bn_update(bool enabled) override;

 private:
  std::vector<std::unique_ptr<Layer>> branch_;
  Tensor cached_sum_;
};

// concatenates the input with a conv-bn-relu growth branch along channels
class ConcatGrowth : public Layer {
 public:
  ConcatGrowth(int in_c, int growth);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;
  void init_params(Rng& rng) override;
  std::string kind() const override { return "concat_growth"; }
  void save_state(nlohmann::json& j) const override;
  void load_state(const nlohmann::json& j) override;
  void set_bn_update(bool enabled) override;

 private:
  int in_c_, growth_;
  std::vector<std::unique_ptr<Layer>> branch_;
};

class Net {
 public:
  Layer* add(std::unique_ptr<Layer> layer);
  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& grad_out);
  std::vector<Param*> params();
  void zero_grads();
  void init_params(Rng& rng);
  int project_constraints();
  void set_bn_update(bool enabled);
  std::uint64_t param_hash() const;
  std::size_t param_count();
  nlohmann::json save_state() const;
  void load_state(const nlohmann::json& j);
  std::size_t layer_count() const { return layers_.size(); }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace tracegan
