#pragma once

#include <filesystem>

#include "tracegan/image.hpp"

namespace tracegan {

// 8-bit RGB PNG, no alpha, no embedded color profile. The buffer must be
// integral byte scale (see quantize_bytes).
void write_png(const ImageBuffer& img, const std::filesystem::path& file);

// decodes to integral byte-scale RGB; gray and alpha inputs are expanded
ImageBuffer read_png(const std::filesystem::path& file);

ImageBuffer read_jpeg(const std::filesystem::path& file);

// dispatch on extension (.png/.jpg/.jpeg/.ppm)
ImageBuffer read_image(const std::filesystem::path& file);

void write_ppm(const ImageBuffer& img, const std::filesystem::path& file);
ImageBuffer read_ppm(const std::filesystem::path& file);

}  // namespace tracegan
