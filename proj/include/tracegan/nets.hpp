#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracegan/corpus.hpp"
#include "tracegan/image.hpp"
#include "tracegan/layers.hpp"

namespace tracegan {

// ---------------------------------------------------------------------------
// image <-> tensor (nets operate on unit-scale values)

Tensor image_to_tensor(const ImageBuffer& img);
Tensor patches_to_tensor(const std::vector<ImageBuffer>& patches);
Tensor patches_to_tensor(const std::vector<const ImageBuffer*>& patches);
ImageBuffer tensor_to_image(const Tensor& t, int batch_index, PixelScale scale);

// ---------------------------------------------------------------------------
// Generator: two ConvBlocks (3x3, 3x3, 1x1 convs with rectifiers) and a
// feature-map reduction conv back to three channels. Fully convolutional, so
// any H x W x 3 input maps to the same shape.

struct GeneratorCfg {
  int block1_width = 64;
  int block2_width = 128;
};
void to_json(nlohmann::json& j, const GeneratorCfg& c);
void from_json(const nlohmann::json& j, GeneratorCfg& c);

class Generator {
 public:
  Generator(const GeneratorCfg& cfg, std::uint64_t init_seed);

  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& grad_out);
  Net& net() { return net_; }
  const Net& net() const { return net_; }
  const GeneratorCfg& cfg() const { return cfg_; }

  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }

 private:
  GeneratorCfg cfg_;
  Net net_;
  bool trained_ = false;
};

// inference entry point: same-size output, rectified (values >= 0), returned
// on the input's declared scale
ImageBuffer generator_forward(Generator& net, const ImageBuffer& image);

// ---------------------------------------------------------------------------
// Discriminator: constrained-conv front, four conv+BN+tanh stages with
// pooling, then a three-layer fully connected head ending in one sigmoid
// neuron. Fixed input size because of the dense head.

struct DiscriminatorCfg {
  int input_size = 256;
  int front_filters = 3;
  std::array<int, 4> widths = {96, 64, 64, 128};
  int fc1 = 200;
  int fc2 = 200;
};
void to_json(nlohmann::json& j, const DiscriminatorCfg& c);
void from_json(const nlohmann::json& j, DiscriminatorCfg& c);

class Discriminator {
 public:
  Discriminator(const DiscriminatorCfg& cfg, std::uint64_t init_seed);

  // returns (n,1,1,1) scores strictly inside (0,1)
  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& grad_out);
  Net& net() { return net_; }
  const Net& net() const { return net_; }
  const DiscriminatorCfg& cfg() const { return cfg_; }

 private:
  DiscriminatorCfg cfg_;
  Net net_;
};

double discriminator_forward(Discriminator& net, const ImageBuffer& patch);

// ---------------------------------------------------------------------------
// Surrogate classifier family. Reduced-scale stand-ins for the published
// architectures, each keeping its distinguishing front end.

enum class Architecture {
  ConstrainedFront,  // learned prediction-error front
  HighpassFront,     // three identical fixed high-pass filters
  PlainConv,
  DenseStyle,
  DeepVggStyle,
  ResidualStyle,
};

std::string architecture_name(Architecture a);
Architecture parse_architecture(const std::string& name);
const std::vector<Architecture>& all_architectures();

struct SurrogateCfg {
  Architecture arch = Architecture::ConstrainedFront;
  ClassDefinition class_def = ClassDefinition::Detection;
  int num_classes = 2;
  int input_size = 256;
  int width = 32;
  int fc = 200;
};
void to_json(nlohmann::json& j, const SurrogateCfg& c);
void from_json(const nlohmann::json& j, SurrogateCfg& c);

class Surrogate {
 public:
  Surrogate(const SurrogateCfg& cfg, std::uint64_t init_seed);

  // returns (n,K,1,1) softmax rows
  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& grad_out);
  Net& net() { return net_; }
  const Net& net() const { return net_; }
  const SurrogateCfg& cfg() const { return cfg_; }

 private:
  SurrogateCfg cfg_;
  Net net_;
};

std::vector<double> surrogate_forward(Surrogate& net, const ImageBuffer& patch);

}  // namespace tracegan
