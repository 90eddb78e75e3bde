#include "tsr/png_io.hpp"

#include <cstdio>
#include <memory>

#include <png.h>

namespace tsr {
namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

[[noreturn]] void fail(const std::string& what, const std::string& path) {
  throw ImageError(what + ": " + path);
}

void write_rows(const std::string& path, int width, int height, int color_type,
                const uint8_t* pixels, size_t stride) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) fail("cannot open for writing", path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail("png writer allocation failed", path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail("png write failed", path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(pixels + static_cast<size_t>(y) * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

GrayImage read_png_gray(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail("cannot open", path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("png reader allocation failed", path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("png decode failed", path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  // Normalize every supported source format to 8-bit gray.
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  const int color_type = png_get_color_type(png, info);
  if (color_type & PNG_COLOR_MASK_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_COLOR || color_type & PNG_COLOR_MASK_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);

  GrayImage image(static_cast<int>(png_get_image_width(png, info)),
                  static_cast<int>(png_get_image_height(png, info)));
  if (png_get_rowbytes(png, info) != static_cast<size_t>(image.width)) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("png did not reduce to 8-bit gray", path);
  }
  for (int y = 0; y < image.height; ++y)
    png_read_row(png, &image.pixels[static_cast<size_t>(y) * image.width], nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void write_png(const GrayImage& image, const std::string& path) {
  if (image.width < 1 || image.height < 1) fail("refusing to write empty image", path);
  write_rows(path, image.width, image.height, PNG_COLOR_TYPE_GRAY, image.pixels.data(),
             static_cast<size_t>(image.width));
}

void write_png(const RgbImage& image, const std::string& path) {
  if (image.width < 1 || image.height < 1) fail("refusing to write empty image", path);
  write_rows(path, image.width, image.height, PNG_COLOR_TYPE_RGB, image.pixels.data(),
             static_cast<size_t>(image.width) * 3);
}

}  // namespace tsr
