#pragma once

#include <cstddef>
#include <vector>

namespace tracegan {

enum class PixelScale { Unit, Byte };

// H x W x 3 interleaved RGB image with double-precision channel values and a
// declared pixel-value scale (unit: 0..1, byte: 0..255).
struct ImageBuffer {
  int height = 0;
  int width = 0;
  PixelScale scale = PixelScale::Byte;
  std::vector<double> data;  // row-major, interleaved RGB

  static constexpr int kChannels = 3;

  ImageBuffer() = default;
  ImageBuffer(int h, int w, PixelScale s, double fill = 0.0);

  double& at(int row, int col, int ch) {
    return data[(static_cast<std::size_t>(row) * width + col) * kChannels + ch];
  }
  double at(int row, int col, int ch) const {
    return data[(static_cast<std::size_t>(row) * width + col) * kChannels + ch];
  }

  double max_value() const { return scale == PixelScale::Byte ? 255.0 : 1.0; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
  bool same_shape(const ImageBuffer& other) const {
    return height == other.height && width == other.width;
  }
};

// throws std::invalid_argument when dims or value bounds are broken
void validate_image(const ImageBuffer& img);

ImageBuffer to_unit(const ImageBuffer& img);
ImageBuffer to_byte(const ImageBuffer& img);  // pure rescale, no rounding

// clamp every value to the declared scale bounds
ImageBuffer clip_to_scale(ImageBuffer img);

// clip to [0,255] and round half away from zero; result is byte scale
ImageBuffer quantize_bytes(const ImageBuffer& img);

// true when scale is byte and every value is an integer in [0,255]
bool is_integral_byte(const ImageBuffer& img);

ImageBuffer crop(const ImageBuffer& img, int row, int col, int h, int w);

bool images_equal(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace tracegan
