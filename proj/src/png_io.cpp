#include "tracegan/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

#include <jpeglib.h>

namespace tracegan {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& file, const char* what) {
  throw std::runtime_error(std::string(what) + ": " + file.string());
}

}  // namespace

void write_png(const ImageBuffer& img, const std::filesystem::path& file) {
  if (!is_integral_byte(img))
    throw std::invalid_argument("write_png: buffer must be integral byte scale");
  FilePtr fp(std::fopen(file.string().c_str(), "wb"));
  if (!fp) fail(file, "cannot open for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(file, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(file, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(file, "png write error");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * 3);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c)
      for (int ch = 0; ch < 3; ++ch)
        row[static_cast<std::size_t>(c) * 3 + ch] = static_cast<unsigned char>(img.at(r, c, ch));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageBuffer read_png(const std::filesystem::path& file) {
  FilePtr fp(std::fopen(file.string().c_str(), "rb"));
  if (!fp) fail(file, "cannot open for reading");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(file, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(file, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(file, "png read error");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_expand(png);  // palettes, gray<8, tRNS
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const int h = static_cast<int>(png_get_image_height(png, info));
  const int w = static_cast<int>(png_get_image_width(png, info));
  if (png_get_rowbytes(png, info) != static_cast<std::size_t>(w) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(file, "unexpected png row layout");
  }

  ImageBuffer img(h, w, PixelScale::Byte);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  for (int r = 0; r < h; ++r) {
    png_read_row(png, row.data(), nullptr);
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch)
        img.at(r, c, ch) = static_cast<double>(row[static_cast<std::size_t>(c) * 3 + ch]);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

ImageBuffer read_jpeg(const std::filesystem::path& file) {
  FilePtr fp(std::fopen(file.string().c_str(), "rb"));
  if (!fp) fail(file, "cannot open for reading");

  jpeg_decompress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp.get());
  if (jpeg_read_header(&cinfo, TRUE) != JPEG_HEADER_OK) {
    jpeg_destroy_decompress(&cinfo);
    fail(file, "not a jpeg");
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int h = static_cast<int>(cinfo.output_height);
  const int w = static_cast<int>(cinfo.output_width);
  ImageBuffer img(h, w, PixelScale::Byte);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  unsigned char* rowp = row.data();
  for (int r = 0; r < h; ++r) {
    jpeg_read_scanlines(&cinfo, &rowp, 1);
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch)
        img.at(r, c, ch) = static_cast<double>(row[static_cast<std::size_t>(c) * 3 + ch]);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

void write_ppm(const ImageBuffer& img, const std::filesystem::path& file) {
  if (!is_integral_byte(img))
    throw std::invalid_argument("write_ppm: buffer must be integral byte scale");
  std::ofstream out(file, std::ios::binary);
  if (!out) fail(file, "cannot open for writing");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  for (double v : img.data) out.put(static_cast<char>(static_cast<unsigned char>(v)));
}

ImageBuffer read_ppm(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(file, "cannot open for reading");
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255 || w < 1 || h < 1) fail(file, "unsupported ppm");
  in.get();  // single whitespace after header
  ImageBuffer img(h, w, PixelScale::Byte);
  std::vector<char> buf(static_cast<std::size_t>(w) * h * 3);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!in) fail(file, "truncated ppm");
  for (std::size_t i = 0; i < buf.size(); ++i)
    img.data[i] = static_cast<double>(static_cast<unsigned char>(buf[i]));
  return img;
}

ImageBuffer read_image(const std::filesystem::path& file) {
  std::string ext = file.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  if (ext == ".png") return read_png(file);
  if (ext == ".jpg" || ext == ".jpeg") return read_jpeg(file);
  if (ext == ".ppm") return read_ppm(file);
  fail(file, "unsupported image format");
}

}  // namespace tracegan
