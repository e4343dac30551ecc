#include "tracegan/synth.hpp"

#include <cmath>

#include "tracegan/rng.hpp"

namespace tracegan {

ImageBuffer synth_image(int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer img(height, width, PixelScale::Byte);

  const double base = 90.0 + 90.0 * rng.uniform();
  const double grad_amp = 15.0 + 35.0 * rng.uniform();
  const double grad_theta = 6.283185307179586 * rng.uniform();
  const double gr = std::cos(grad_theta), gc = std::sin(grad_theta);

  struct Wave {
    double fr, fc, phase, amp;
  };
  Wave waves[3];
  for (Wave& w : waves) {
    // wavelengths of roughly 24..128 px keep the content smooth
    double freq = (1.0 / 128.0) + (1.0 / 24.0 - 1.0 / 128.0) * rng.uniform();
    double theta = 6.283185307179586 * rng.uniform();
    w.fr = freq * std::cos(theta);
    w.fc = freq * std::sin(theta);
    w.phase = 6.283185307179586 * rng.uniform();
    w.amp = 8.0 + 22.0 * rng.uniform();
  }

  struct Blob {
    double r, c, sigma, amp;
  };
  Blob blobs[2];
  for (Blob& b : blobs) {
    b.r = height * rng.uniform();
    b.c = width * rng.uniform();
    b.sigma = 8.0 + 24.0 * rng.uniform();
    b.amp = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (15.0 + 30.0 * rng.uniform());
  }

  double tint[3];
  for (double& t : tint) t = 0.9 + 0.2 * rng.uniform();
  const double noise_sigma = 1.0 + 1.0 * rng.uniform();

  const double diag = std::sqrt(static_cast<double>(height) * height +
                                static_cast<double>(width) * width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double v = base + grad_amp * (gr * r + gc * c) / diag * 2.0;
      for (const Wave& w : waves)
        v += w.amp * std::cos(6.283185307179586 * (w.fr * r + w.fc * c) + w.phase);
      for (const Blob& b : blobs) {
        double d2 = (r - b.r) * (r - b.r) + (c - b.c) * (c - b.c);
        v += b.amp * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
      }
      for (int ch = 0; ch < 3; ++ch)
        img.at(r, c, ch) = tint[ch] * v + noise_sigma * rng.normal();
    }
  }
  return quantize_bytes(img);
}

MemoryImageProvider synth_corpus(int count, int height, int width, std::uint64_t seed) {
  MemoryImageProvider provider;
  for (int i = 0; i < count; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "img%04d", i);
    provider.add(name, synth_image(height, width, derive_seed(seed, static_cast<std::uint64_t>(i))));
  }
  return provider;
}

}  // namespace tracegan
