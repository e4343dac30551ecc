#include "tracegan/nets.hpp"

#include <cmath>
#include <stdexcept>

namespace tracegan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// conversions

Tensor image_to_tensor(const ImageBuffer& img) {
  Tensor t(1, 3, img.height, img.width);
  const double scale = img.scale == PixelScale::Byte ? 1.0 / 255.0 : 1.0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int ch = 0; ch < 3; ++ch) t.at(0, ch, y, x) = scale * img.at(y, x, ch);
  return t;
}

Tensor patches_to_tensor(const std::vector<const ImageBuffer*>& patches) {
  if (patches.empty()) throw std::invalid_argument("patches_to_tensor: empty batch");
  const int h = patches[0]->height, w = patches[0]->width;
  Tensor t(static_cast<int>(patches.size()), 3, h, w);
  for (std::size_t n = 0; n < patches.size(); ++n) {
    const ImageBuffer& p = *patches[n];
    if (p.height != h || p.width != w)
      throw std::invalid_argument("patches_to_tensor: mixed patch sizes");
    const double scale = p.scale == PixelScale::Byte ? 1.0 / 255.0 : 1.0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int ch = 0; ch < 3; ++ch)
          t.at(static_cast<int>(n), ch, y, x) = scale * p.at(y, x, ch);
  }
  return t;
}

Tensor patches_to_tensor(const std::vector<ImageBuffer>& patches) {
  std::vector<const ImageBuffer*> ptrs;
  ptrs.reserve(patches.size());
  for (const auto& p : patches) ptrs.push_back(&p);
  return patches_to_tensor(ptrs);
}

ImageBuffer tensor_to_image(const Tensor& t, int batch_index, PixelScale scale) {
  if (t.c != 3) throw std::invalid_argument("tensor_to_image: need 3 channels");
  ImageBuffer img(t.h, t.w, scale);
  const double s = scale == PixelScale::Byte ? 255.0 : 1.0;
  for (int y = 0; y < t.h; ++y)
    for (int x = 0; x < t.w; ++x)
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = s * t.at(batch_index, ch, y, x);
  return img;
}

// ---------------------------------------------------------------------------
// Generator

void to_json(json& j, const GeneratorCfg& c) {
  j = json{{"block1_width", c.block1_width}, {"block2_width", c.block2_width}};
}
void from_json(const json& j, GeneratorCfg& c) {
  j.at("block1_width").get_to(c.block1_width);
  j.at("block2_width").get_to(c.block2_width);
}

namespace {
void add_conv_block(Net& net, int in_c, int width) {
  net.add(std::make_unique<Conv2d>(in_c, width, 3));
  net.add(std::make_unique<ReLU>());
  net.add(std::make_unique<Conv2d>(width, width, 3));
  net.add(std::make_unique<ReLU>());
  net.add(std::make_unique<Conv2d>(width, width, 1));
  net.add(std::make_unique<ReLU>());
}
}  // namespace

Generator::Generator(const GeneratorCfg& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  if (cfg.block1_width < 1 || cfg.block2_width < 1)
    throw std::invalid_argument("Generator: widths must be >= 1");
  add_conv_block(net_, 3, cfg.block1_width);
  add_conv_block(net_, cfg.block1_width, cfg.block2_width);
  // feature map reduction back to a color image
  net_.add(std::make_unique<Conv2d>(cfg.block2_width, 3, 3));
  net_.add(std::make_unique<ReLU>());
  Rng rng(init_seed);
  net_.init_params(rng);
}

Tensor Generator::forward(const Tensor& x, bool training) {
  if (x.c != 3) throw std::invalid_argument("Generator: input must have 3 channels");
  return net_.forward(x, training);
}

Tensor Generator::backward(const Tensor& grad_out) { return net_.backward(grad_out); }

ImageBuffer generator_forward(Generator& net, const ImageBuffer& image) {
  if (image.height < 1 || image.width < 1)
    throw std::invalid_argument("generator_forward: empty image");
  const bool had_grads = grad_enabled();
  set_grad_enabled(false);
  Tensor out = net.forward(image_to_tensor(image), false);
  set_grad_enabled(had_grads);
  for (double v : out.v)
    if (!std::isfinite(v)) throw std::runtime_error("generator_forward: non-finite output");
  return tensor_to_image(out, 0, image.scale);
}

// ---------------------------------------------------------------------------
// Discriminator

void to_json(json& j, const DiscriminatorCfg& c) {
  j = json{{"input_size", c.input_size}, {"front_filters", c.front_filters},
           {"widths", c.widths},         {"fc1", c.fc1},
           {"fc2", c.fc2}};
}
void from_json(const json& j, DiscriminatorCfg& c) {
  j.at("input_size").get_to(c.input_size);
  j.at("front_filters").get_to(c.front_filters);
  j.at("widths").get_to(c.widths);
  j.at("fc1").get_to(c.fc1);
  j.at("fc2").get_to(c.fc2);
}

Discriminator::Discriminator(const DiscriminatorCfg& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  if (cfg.input_size < 16 || cfg.input_size % 16 != 0)
    throw std::invalid_argument("Discriminator: input_size must be a positive multiple of 16");
  net_.add(std::make_unique<ConstrainedConv2d>(3, cfg.front_filters, 5));
  int c = cfg.front_filters;
  for (int width : cfg.widths) {
    net_.add(std::make_unique<Conv2d>(c, width, 3));
    net_.add(std::make_unique<BatchNorm2d>(width));
    net_.add(std::make_unique<Tanh>());
    net_.add(std::make_unique<MaxPool2d>(2));
    c = width;
  }
  const int spatial = cfg.input_size / 16;
  net_.add(std::make_unique<Flatten>());
  net_.add(std::make_unique<Dense>(c * spatial * spatial, cfg.fc1));
  net_.add(std::make_unique<Tanh>());
  net_.add(std::make_unique<Dense>(cfg.fc1, cfg.fc2));
  net_.add(std::make_unique<Tanh>());
  net_.add(std::make_unique<Dense>(cfg.fc2, 1));
  net_.add(std::make_unique<Sigmoid>());
  Rng rng(init_seed);
  net_.init_params(rng);
}

Tensor Discriminator::forward(const Tensor& x, bool training) {
  if (x.c != 3 || x.h != cfg_.input_size || x.w != cfg_.input_size)
    throw std::invalid_argument("Discriminator: wrong input shape");
  return net_.forward(x, training);
}

Tensor Discriminator::backward(const Tensor& grad_out) { return net_.backward(grad_out); }

double discriminator_forward(Discriminator& net, const ImageBuffer& patch) {
  if (patch.height != net.cfg().input_size || patch.width != net.cfg().input_size)
    throw std::invalid_argument("discriminator_forward: wrong patch shape");
  const bool had_grads = grad_enabled();
  set_grad_enabled(false);
  Tensor out = net.forward(image_to_tensor(patch), false);
  set_grad_enabled(had_grads);
  return out.v[0];
}

// ---------------------------------------------------------------------------
// Surrogates

std::string architecture_name(Architecture a) {
  switch (a) {
    case Architecture::ConstrainedFront: return "constrained_front";
    case Architecture::HighpassFront: return "highpass_front";
    case Architecture::PlainConv: return "plain_conv";
    case Architecture::DenseStyle: return "dense_style";
    case Architecture::DeepVggStyle: return "deep_vgg_style";
    case Architecture::ResidualStyle: return "residual_style";
  }
  throw std::logic_error("bad Architecture");
}

Architecture parse_architecture(const std::string& name) {
  for (Architecture a : all_architectures())
    if (architecture_name(a) == name) return a;
  throw std::invalid_argument("unknown architecture: " + name);
}

const std::vector<Architecture>& all_architectures() {
  static const std::vector<Architecture> all = {
      Architecture::ConstrainedFront, Architecture::HighpassFront, Architecture::PlainConv,
      Architecture::DenseStyle,       Architecture::DeepVggStyle,  Architecture::ResidualStyle,
  };
  return all;
}

void to_json(json& j, const SurrogateCfg& c) {
  j = json{{"architecture", architecture_name(c.arch)},
           {"class_def", class_def_name(c.class_def)},
           {"num_classes", c.num_classes},
           {"input_size", c.input_size},
           {"width", c.width},
           {"fc", c.fc}};
}
void from_json(const json& j, SurrogateCfg& c) {
  c.arch = parse_architecture(j.at("architecture").get<std::string>());
  c.class_def = parse_class_def(j.at("class_def").get<std::string>());
  j.at("num_classes").get_to(c.num_classes);
  j.at("input_size").get_to(c.input_size);
  j.at("width").get_to(c.width);
  j.at("fc").get_to(c.fc);
}

namespace {

void add_softmax_head(Net& net, int features, int fc, int num_classes, bool tanh_head) {
  net.add(std::make_unique<Flatten>());
  net.add(std::make_unique<Dense>(features, fc));
  if (tanh_head)
    net.add(std::make_unique<Tanh>());
  else
    net.add(std::make_unique<ReLU>());
  net.add(std::make_unique<Dense>(fc, num_classes));
  net.add(std::make_unique<Softmax>());
}

}  // namespace

Surrogate::Surrogate(const SurrogateCfg& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  if (cfg.num_classes < 2) throw std::invalid_argument("Surrogate: need at least 2 classes");
  if (cfg.input_size < 8 || cfg.input_size % 8 != 0)
    throw std::invalid_argument("Surrogate: input_size must be a positive multiple of 8");
  const int w = cfg.width;
  const int s = cfg.input_size / 8;
  Net& n = net_;
  switch (cfg.arch) {
    case Architecture::ConstrainedFront: {
      n.add(std::make_unique<ConstrainedConv2d>(3, 3, 5));
      int c = 3;
      for (int i = 0; i < 3; ++i) {
        n.add(std::make_unique<Conv2d>(c, w, 3));
        n.add(std::make_unique<BatchNorm2d>(w));
        n.add(std::make_unique<Tanh>());
        n.add(std::make_unique<MaxPool2d>(2));
        c = w;
      }
      add_softmax_head(n, w * s * s, cfg.fc, cfg.num_classes, true);
      break;
    }
    case Architecture::HighpassFront: {
      n.add(std::make_unique<FixedHighpass>());
      int c = 3;
      for (int i = 0; i < 3; ++i) {
        n.add(std::make_unique<Conv2d>(c, w, 3));
        n.add(std::make_unique<BatchNorm2d>(w));
        n.add(std::make_unique<Tanh>());
        n.add(std::make_unique<MaxPool2d>(2));
        c = w;
      }
      add_softmax_head(n, w * s * s, cfg.fc, cfg.num_classes, true);
      break;
    }
    case Architecture::PlainConv: {
      int c = 3;
      for (int i = 0; i < 3; ++i) {
        n.add(std::make_unique<Conv2d>(c, w, i == 0 ? 5 : 3));
        n.add(std::make_unique<BatchNorm2d>(w));
        n.add(std::make_unique<ReLU>());
        n.add(std::make_unique<MaxPool2d>(2));
        c = w;
      }
      add_softmax_head(n, w * s * s, cfg.fc, cfg.num_classes, false);
      break;
    }
    case Architecture::DenseStyle: {
      const int growth = std::max(1, w / 2);
      n.add(std::make_unique<Conv2d>(3, w, 3));
      n.add(std::make_unique<BatchNorm2d>(w));
      n.add(std::make_unique<ReLU>());
      n.add(std::make_unique<MaxPool2d>(2));
      n.add(std::make_unique<ConcatGrowth>(w, growth));
      n.add(std::make_unique<ConcatGrowth>(w + growth, growth));
      n.add(std::make_unique<Conv2d>(w + 2 * growth, w, 1));
      n.add(std::make_unique<ReLU>());
      n.add(std::make_unique<MaxPool2d>(2));
      n.add(std::make_unique<MaxPool2d>(2));
      add_softmax_head(n, w * s * s, cfg.fc, cfg.num_classes, false);
      break;
    }
    case Architecture::DeepVggStyle: {
      int c = 3;
      for (int stage = 0; stage < 3; ++stage) {
        n.add(std::make_unique<Conv2d>(c, w, 3));
        n.add(std::make_unique<ReLU>());
        if (stage < 2) {
          n.add(std::make_unique<Conv2d>(w, w, 3));
          n.add(std::make_unique<ReLU>());
        }
        n.add(std::make_unique<MaxPool2d>(2));
        c = w;
      }
      add_softmax_head(n, w * s * s, cfg.fc, cfg.num_classes, false);
      break;
    }
    case Architecture::ResidualStyle: {
      n.add(std::make_unique<Conv2d>(3, w, 3));
      n.add(std::make_unique<BatchNorm2d>(w));
      n.add(std::make_unique<ReLU>());
      n.add(std::make_unique<MaxPool2d>(2));
      n.add(std::make_unique<ResidualBlock>(w));
      n.add(std::make_unique<MaxPool2d>(2));
      n.add(std::make_unique<ResidualBlock>(w));
      n.add(std::make_unique<MaxPool2d>(2));
      add_softmax_head(n, w * s * s, cfg.fc, cfg.num_classes, false);
      break;
    }
  }
  Rng rng(init_seed);
  net_.init_params(rng);
}

Tensor Surrogate::forward(const Tensor& x, bool training) {
  if (x.c != 3 || x.h != cfg_.input_size || x.w != cfg_.input_size)
    throw std::invalid_argument("Surrogate: wrong input shape");
  return net_.forward(x, training);
}

Tensor Surrogate::backward(const Tensor& grad_out) { return net_.backward(grad_out); }

std::vector<double> surrogate_forward(Surrogate& net, const ImageBuffer& patch) {
  if (patch.height != net.cfg().input_size || patch.width != net.cfg().input_size)
    throw std::invalid_argument("surrogate_forward: wrong patch shape");
  const bool had_grads = grad_enabled();
  set_grad_enabled(false);
  Tensor out = net.forward(image_to_tensor(patch), false);
  set_grad_enabled(had_grads);
  return std::vector<double>(out.v.begin(), out.v.end());
}

}  // namespace tracegan
