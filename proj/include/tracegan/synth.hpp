#pragma once

#include <cstdint>

#include "tracegan/corpus.hpp"
#include "tracegan/image.hpp"

namespace tracegan {

// Procedural photo-like test image: smooth low-frequency content (gradients,
// cosine fields, soft blobs) plus mild sensor-style noise, quantized to
// integral bytes.
ImageBuffer synth_image(int height, int width, std::uint64_t seed);

// count images named img0000..img{count-1}
MemoryImageProvider synth_corpus(int count, int height, int width, std::uint64_t seed);

}  // namespace tracegan
