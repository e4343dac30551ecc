#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "tracegan/attack.hpp"
#include "tracegan/corpus.hpp"
#include "tracegan/png_io.hpp"
#include "tracegan/rng.hpp"
#include "tracegan/synth.hpp"

using namespace tracegan;

namespace {

const std::filesystem::path kTmp = std::filesystem::temp_directory_path() / "tracegan_attack_test";

// routes each input channel through the conv stack untouched (widths >= 3)
void make_passthrough(Generator& gen) {
  for (Param* p : gen.net().params()) p->value.zero();
  std::vector<Param*> params = gen.net().params();
  // weights sit at even indices (weight, bias alternate per conv)
  for (std::size_t i = 0; i + 1 < params.size(); i += 2) {
    Tensor& w = params[i]->value;
    const int k = w.h;
    for (int c = 0; c < 3 && c < w.n && c < w.c; ++c) w.at(c, c, k / 2, k / 2) = 1.0;
  }
  gen.mark_trained();
}

ImageBuffer random_byte_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer img(h, w, PixelScale::Byte);
  for (double& v : img.data) v = static_cast<double>(rng.uniform_int(256));
  return img;
}

}  // namespace

TEST_CASE("attack_patch rejects an untrained generator") {
  Generator gen(GeneratorCfg{4, 4}, 1);
  ImageBuffer patch(16, 16, PixelScale::Byte, 10.0);
  CHECK_THROWS(attack_patch(gen, patch));
}

TEST_CASE("pass-through weights reproduce the input patch") {
  Generator gen(GeneratorCfg{4, 4}, 1);
  make_passthrough(gen);
  ImageBuffer patch = synth_image(24, 24, 5);
  ImageBuffer out = attack_patch(gen, patch);
  CHECK(out.height == patch.height);
  CHECK(out.width == patch.width);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    CHECK(out.data[i] == doctest::Approx(patch.data[i]).epsilon(1e-9));
}

TEST_CASE("attacked patches stay in byte range after quantization") {
  Generator gen(GeneratorCfg{4, 4}, 3);
  gen.mark_trained();
  ImageBuffer patch = synth_image(16, 16, 9);
  ImageBuffer out = quantize_bytes(attack_patch(gen, patch));
  for (double v : out.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 255.0);
  }
}

TEST_CASE("full-image attack tiles and reassembles in original order") {
  Generator gen(GeneratorCfg{4, 4}, 7);
  make_passthrough(gen);
  ImageBuffer image = synth_image(128, 128, 11);
  ImageBuffer out = attack_full_image(gen, image, 64);
  CHECK(out.height == 128);
  CHECK(out.width == 128);
  // equals the 2x2 mosaic of per-tile attacks
  for (const PatchOrigin& o : patch_grid(128, 128, 64)) {
    ImageBuffer tile = attack_patch(gen, crop(image, o.row, o.col, 64, 64));
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c)
        for (int ch = 0; ch < 3; ++ch)
          CHECK(out.at(o.row + r, o.col + c, ch) == tile.at(r, c, ch));
  }
}

TEST_CASE("remainder margins are copied from the input unchanged") {
  Generator gen(GeneratorCfg{4, 4}, 13);
  make_passthrough(gen);
  // poke the margin so pass-through results differ measurably from zero
  ImageBuffer image = synth_image(150, 150, 3);
  ImageBuffer out = attack_full_image(gen, image, 64);
  // tiles cover [0,128); margins live at rows/cols 128..149
  for (int r = 128; r < 150; ++r)
    for (int c = 0; c < 150; ++c)
      for (int ch = 0; ch < 3; ++ch) CHECK(out.at(r, c, ch) == image.at(r, c, ch));
  for (int r = 0; r < 150; ++r)
    for (int c = 128; c < 150; ++c)
      for (int ch = 0; ch < 3; ++ch) CHECK(out.at(r, c, ch) == image.at(r, c, ch));
}

TEST_CASE("images smaller than one patch are rejected, not resampled") {
  Generator gen(GeneratorCfg{4, 4}, 17);
  gen.mark_trained();
  ImageBuffer small(63, 200, PixelScale::Byte, 5.0);
  CHECK_THROWS_WITH_AS(attack_full_image(gen, small, 64),
                       doctest::Contains("pad the image or attack a crop"),
                       std::invalid_argument);
}

TEST_CASE("png round-trip is exact on integral byte images") {
  std::filesystem::create_directories(kTmp);
  for (int i = 0; i < 8; ++i) {
    ImageBuffer img = random_byte_image(17 + i, 23 + i, 100 + i);
    ImageBuffer back = png_roundtrip(img, kTmp / ("rt" + std::to_string(i) + ".png"));
    CHECK(images_equal(img, back));
  }
}

TEST_CASE("png round-trip applies the clip and round rule") {
  std::filesystem::create_directories(kTmp);
  ImageBuffer img(1, 2, PixelScale::Byte);
  img.at(0, 0, 0) = 254.6;
  img.at(0, 0, 1) = -3.2;
  img.at(0, 0, 2) = 17.5;
  img.at(0, 1, 0) = 16.49;
  img.at(0, 1, 1) = 255.0;
  img.at(0, 1, 2) = 0.0;
  ImageBuffer back = png_roundtrip(img, kTmp / "clip.png");
  CHECK(back.at(0, 0, 0) == 255.0);
  CHECK(back.at(0, 0, 1) == 0.0);
  CHECK(back.at(0, 0, 2) == 18.0);
  CHECK(back.at(0, 1, 0) == 16.0);
  CHECK(back.at(0, 1, 1) == 255.0);
  CHECK(back.at(0, 1, 2) == 0.0);
  CHECK(is_integral_byte(back));
}

TEST_CASE("png round-trip is idempotent") {
  std::filesystem::create_directories(kTmp);
  ImageBuffer img(6, 5, PixelScale::Unit);
  Rng rng(9);
  for (double& v : img.data) v = rng.uniform() * 1.4 - 0.2;  // some out-of-range values
  ImageBuffer once = png_roundtrip(img, kTmp / "idem1.png");
  ImageBuffer twice = png_roundtrip(once, kTmp / "idem2.png");
  CHECK(images_equal(once, twice));
}

TEST_CASE("png round-trip rejects non-finite values and surfaces bad paths") {
  ImageBuffer img(2, 2, PixelScale::Byte, 1.0);
  img.data[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(png_roundtrip(img, kTmp / "nan.png"));
  ImageBuffer ok(2, 2, PixelScale::Byte, 1.0);
  CHECK_THROWS_WITH_AS(write_png(quantize_bytes(ok), "/nonexistent-dir/x.png"),
                       doctest::Contains("/nonexistent-dir/x.png"), std::runtime_error);
}

TEST_CASE("png files decode to what was written") {
  std::filesystem::create_directories(kTmp);
  ImageBuffer img = synth_image(21, 34, 77);
  write_png(img, kTmp / "w.png");
  ImageBuffer back = read_png(kTmp / "w.png");
  CHECK(images_equal(img, back));
  // ppm path for completeness
  write_ppm(img, kTmp / "w.ppm");
  CHECK(images_equal(read_ppm(kTmp / "w.ppm"), img));
  CHECK(images_equal(read_image(kTmp / "w.png"), img));
}
