#pragma once

#include <string>

#include "tsr/image.hpp"

namespace tsr {

// 8-bit grayscale PNG. Reading converts paletted/RGB/16-bit sources down to
// 8-bit gray; writing always emits single-channel 8-bit.
GrayImage read_png_gray(const std::string& path);
void write_png(const GrayImage& image, const std::string& path);

// 24-bit RGB PNG (used for overlay renders).
void write_png(const RgbImage& image, const std::string& path);

}  // namespace tsr
