#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsr/pairing.hpp"
#include "tsr/table.hpp"

namespace tsr {

struct ImageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 8-bit single-channel raster. Ink is dark (0), background is white (255).
constexpr uint8_t kBackground = 255;

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major, width * height

  GrayImage() = default;
  GrayImage(int w, int h, uint8_t fill = kBackground)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

  uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major, 3 * width * height

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, 255) {}

  uint8_t* at(int x, int y) { return &pixels[(static_cast<size_t>(y) * width + x) * 3]; }
  const uint8_t* at(int x, int y) const {
    return &pixels[(static_cast<size_t>(y) * width + x) * 3];
  }
};

// Extracts the region covered by `box` (inclusive coordinates). The box must
// lie fully inside the image.
GrayImage crop(const GrayImage& image, const BBox& box);

// Crop of the tightest box containing both inputs.
GrayImage union_crop(const GrayImage& image, const BBox& a, const BBox& b);

// Fits `image` into target_width x target_height without distortion. Content
// that already fits is kept at original scale in the top-left corner; larger
// content is scaled down by the single factor that makes both dimensions fit,
// using bilinear interpolation. The remainder is padded with background.
GrayImage resize_pad(const GrayImage& image, int target_height, int target_width);

// Writes the image into `dst` (size width*height) as floats in [0, 1] with
// ink mapped to 1 and background to 0.
void copy_normalized(const GrayImage& image, float* dst);

// Debug rendering: cell boxes plus relation edges drawn between operative-box
// centers (blue horizontal, red vertical). When `predictions` is given, its
// labels are drawn instead and any pair whose predicted label disagrees with
// the table's relations is highlighted in magenta.
RgbImage render_overlay(const GrayImage& image, const Table& table,
                        const std::vector<PairCandidate>* predictions = nullptr);

}  // namespace tsr
