#include "tracegan/image.hpp"

#include <cmath>
#include <stdexcept>

namespace tracegan {

ImageBuffer::ImageBuffer(int h, int w, PixelScale s, double fill)
    : height(h), width(w), scale(s) {
  if (h < 1 || w < 1) throw std::invalid_argument("ImageBuffer: dims must be >= 1");
  data.assign(static_cast<std::size_t>(h) * w * kChannels, fill);
}

void validate_image(const ImageBuffer& img) {
  if (img.height < 1 || img.width < 1)
    throw std::invalid_argument("image: dims must be >= 1");
  if (img.data.size() != img.pixel_count() * ImageBuffer::kChannels)
    throw std::invalid_argument("image: data size does not match dims");
  const double hi = img.max_value();
  for (double v : img.data) {
    if (!(v >= 0.0 && v <= hi))
      throw std::invalid_argument("image: value outside declared scale");
  }
}

ImageBuffer to_unit(const ImageBuffer& img) {
  if (img.scale == PixelScale::Unit) return img;
  ImageBuffer out = img;
  out.scale = PixelScale::Unit;
  for (double& v : out.data) v /= 255.0;
  return out;
}

ImageBuffer to_byte(const ImageBuffer& img) {
  if (img.scale == PixelScale::Byte) return img;
  ImageBuffer out = img;
  out.scale = PixelScale::Byte;
  for (double& v : out.data) v *= 255.0;
  return out;
}

ImageBuffer clip_to_scale(ImageBuffer img) {
  const double hi = img.max_value();
  for (double& v : img.data) {
    if (v < 0.0) v = 0.0;
    if (v > hi) v = hi;
  }
  return img;
}

ImageBuffer quantize_bytes(const ImageBuffer& img) {
  ImageBuffer out = to_byte(img);
  for (double& v : out.data) {
    if (v < 0.0) v = 0.0;
    if (v > 255.0) v = 255.0;
    v = std::round(v);  // std::round is half away from zero
  }
  return out;
}

bool is_integral_byte(const ImageBuffer& img) {
  if (img.scale != PixelScale::Byte) return false;
  for (double v : img.data) {
    if (!(v >= 0.0 && v <= 255.0)) return false;
    if (v != std::floor(v)) return false;
  }
  return true;
}

ImageBuffer crop(const ImageBuffer& img, int row, int col, int h, int w) {
  if (row < 0 || col < 0 || h < 1 || w < 1 || row + h > img.height || col + w > img.width)
    throw std::invalid_argument("crop: window outside image");
  ImageBuffer out(h, w, img.scale);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < ImageBuffer::kChannels; ++ch)
        out.at(r, c, ch) = img.at(row + r, col + c, ch);
  return out;
}

bool images_equal(const ImageBuffer& a, const ImageBuffer& b) {
  return a.height == b.height && a.width == b.width && a.scale == b.scale &&
         a.data == b.data;
}

}  // namespace tracegan
