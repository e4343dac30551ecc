#include "tracegan/attack.hpp"

#include <cmath>
#include <stdexcept>

#include "tracegan/corpus.hpp"
#include "tracegan/png_io.hpp"

namespace tracegan {

ImageBuffer attack_patch(Generator& generator, const ImageBuffer& patch) {
  if (!generator.trained())
    throw std::invalid_argument("attack_patch: generator is untrained");
  return clip_to_scale(generator_forward(generator, patch));
}

ImageBuffer attack_full_image(Generator& generator, const ImageBuffer& image, int patch_size) {
  if (image.height < patch_size || image.width < patch_size)
    throw std::invalid_argument(
        "attack_full_image: image smaller than one patch; pad the image or attack a crop with "
        "attack_patch (inputs are never silently resampled)");
  ImageBuffer out = image;  // margins outside the tiling stay untouched
  for (const PatchOrigin& o : patch_grid(image.height, image.width, patch_size)) {
    ImageBuffer tile = crop(image, o.row, o.col, patch_size, patch_size);
    ImageBuffer attacked = attack_patch(generator, tile);
    for (int r = 0; r < patch_size; ++r)
      for (int c = 0; c < patch_size; ++c)
        for (int ch = 0; ch < ImageBuffer::kChannels; ++ch)
          out.at(o.row + r, o.col + c, ch) = attacked.at(r, c, ch);
  }
  return out;
}

ImageBuffer png_roundtrip(const ImageBuffer& image, const std::filesystem::path& file) {
  for (double v : image.data)
    if (!std::isfinite(v)) throw std::invalid_argument("png_roundtrip: non-finite value");
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  write_png(quantize_bytes(image), file);
  return read_png(file);
}

}  // namespace tracegan
