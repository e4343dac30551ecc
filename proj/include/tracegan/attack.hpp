#pragma once

#include <filesystem>

#include "tracegan/image.hpp"
#include "tracegan/nets.hpp"

namespace tracegan {

// runs a trained generator on one patch; same-shape output clipped to scale
ImageBuffer attack_patch(Generator& generator, const ImageBuffer& patch);

// Tiles the image with non-overlapping patch_size tiles, attacks each tile
// and reassembles at the original origins. Remainder margins smaller than a
// tile are copied from the input unchanged (never resampled). Rejects images
// smaller than one tile.
ImageBuffer attack_full_image(Generator& generator, const ImageBuffer& image,
                              int patch_size = 256);

// clip to [0,255], round half away from zero, write as 8-bit RGB PNG, read it
// back; the result is integral byte scale
ImageBuffer png_roundtrip(const ImageBuffer& image, const std::filesystem::path& file);

}  // namespace tracegan
