#include "core/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace svr::core {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint16_t quantize(double v, int max_val) {
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<uint16_t>(std::lround(v * max_val));
}

void write_png(const std::string& path, int h, int w, int channels, int bit_depth,
               const std::vector<std::vector<png_byte>>& rows) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng error while writing " + path);
  }
  png_init_io(png, fp.get());
  const int color_type = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // rows are little-endian in memory
  for (int i = 0; i < h; ++i)
    png_write_row(png, const_cast<png_bytep>(rows[static_cast<size_t>(i)].data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png_rgb(const std::string& path, const Tensor& img) {
  if (img.rank() != 3 || img.dim(2) != 3)
    throw std::invalid_argument("write_png_rgb expects (H,W,3)");
  const int h = img.dim(0), w = img.dim(1);
  std::vector<std::vector<png_byte>> rows(static_cast<size_t>(h));
  for (int i = 0; i < h; ++i) {
    auto& row = rows[static_cast<size_t>(i)];
    row.resize(static_cast<size_t>(w) * 3);
    for (int j = 0; j < w; ++j)
      for (int c = 0; c < 3; ++c)
        row[static_cast<size_t>(j) * 3 + c] =
            static_cast<png_byte>(quantize(img.at(i, j, c), 255));
  }
  write_png(path, h, w, 3, 8, rows);
}

void write_png_gray8(const std::string& path, const Tensor& img) {
  if (img.rank() != 2) throw std::invalid_argument("write_png_gray8 expects (H,W)");
  const int h = img.dim(0), w = img.dim(1);
  std::vector<std::vector<png_byte>> rows(static_cast<size_t>(h));
  for (int i = 0; i < h; ++i) {
    auto& row = rows[static_cast<size_t>(i)];
    row.resize(static_cast<size_t>(w));
    for (int j = 0; j < w; ++j)
      row[static_cast<size_t>(j)] = static_cast<png_byte>(quantize(img.at(i, j), 255));
  }
  write_png(path, h, w, 1, 8, rows);
}

void write_png_gray16(const std::string& path, const Tensor& img) {
  if (img.rank() != 2) throw std::invalid_argument("write_png_gray16 expects (H,W)");
  const int h = img.dim(0), w = img.dim(1);
  std::vector<std::vector<png_byte>> rows(static_cast<size_t>(h));
  for (int i = 0; i < h; ++i) {
    auto& row = rows[static_cast<size_t>(i)];
    row.resize(static_cast<size_t>(w) * 2);
    for (int j = 0; j < w; ++j) {
      const uint16_t v = quantize(img.at(i, j), 65535);
      row[static_cast<size_t>(j) * 2] = static_cast<png_byte>(v & 0xff);
      row[static_cast<size_t>(j) * 2 + 1] = static_cast<png_byte>(v >> 8);
    }
  }
  write_png(path, h, w, 1, 16, rows);
}

namespace {

struct PngImage {
  int h = 0, w = 0, channels = 0, bit_depth = 0;
  std::vector<png_byte> data;  // rows * row_bytes
  size_t row_bytes = 0;
};

PngImage read_png(const std::string& path, bool want_gray) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open for reading: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng error while reading " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  if (want_gray)
    png_set_rgb_to_gray(png, PNG_ERROR_ACTION_NONE, -1, -1);
  else {
    const png_byte ct = png_get_color_type(png, info);
    if (ct == PNG_COLOR_TYPE_GRAY || ct == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
  }
  if (png_get_bit_depth(png, info) == 16) png_set_swap(png);
  png_read_update_info(png, info);

  PngImage img;
  img.h = static_cast<int>(png_get_image_height(png, info));
  img.w = static_cast<int>(png_get_image_width(png, info));
  img.bit_depth = png_get_bit_depth(png, info);
  img.channels = png_get_channels(png, info);
  img.row_bytes = png_get_rowbytes(png, info);
  img.data.resize(img.row_bytes * static_cast<size_t>(img.h));
  std::vector<png_bytep> rows(static_cast<size_t>(img.h));
  for (int i = 0; i < img.h; ++i)
    rows[static_cast<size_t>(i)] = img.data.data() + img.row_bytes * static_cast<size_t>(i);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

double sample_at(const PngImage& img, int i, int j, int c) {
  if (img.bit_depth == 16) {
    const size_t off = img.row_bytes * static_cast<size_t>(i) +
                       (static_cast<size_t>(j) * img.channels + c) * 2;
    const uint16_t v = static_cast<uint16_t>(img.data[off] | (img.data[off + 1] << 8));
    return v / 65535.0;
  }
  const size_t off =
      img.row_bytes * static_cast<size_t>(i) + static_cast<size_t>(j) * img.channels + c;
  return img.data[off] / 255.0;
}

}  // namespace

Tensor read_png_rgb(const std::string& path) {
  PngImage img = read_png(path, false);
  if (img.channels < 3) throw std::runtime_error("expected rgb png: " + path);
  Tensor out({img.h, img.w, 3});
  for (int i = 0; i < img.h; ++i)
    for (int j = 0; j < img.w; ++j)
      for (int c = 0; c < 3; ++c) out.at(i, j, c) = sample_at(img, i, j, c);
  return out;
}

Tensor read_png_gray(const std::string& path) {
  PngImage img = read_png(path, true);
  Tensor out({img.h, img.w});
  for (int i = 0; i < img.h; ++i)
    for (int j = 0; j < img.w; ++j) out.at(i, j) = sample_at(img, i, j, 0);
  return out;
}

}  // namespace svr::core
