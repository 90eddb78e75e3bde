#include "tsr/image.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tsr {
namespace {

// Bilinear sample with the half-pixel-center convention, clamped at borders.
double sample_bilinear(const GrayImage& src, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(src.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(src.height - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, src.width - 1);
  const int y1 = std::min(y0 + 1, src.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = src.at(x0, y0) * (1.0 - fx) + src.at(x1, y0) * fx;
  const double bottom = src.at(x0, y1) * (1.0 - fx) + src.at(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

}  // namespace

GrayImage crop(const GrayImage& image, const BBox& box) {
  if (!box.valid()) throw ImageError("crop box is degenerate");
  if (box.x1 < 0 || box.y1 < 0 || box.x2 >= image.width || box.y2 >= image.height)
    throw ImageError("crop box escapes the image");
  GrayImage out(box.width(), box.height());
  for (int y = 0; y < out.height; ++y) {
    const uint8_t* src = &image.pixels[static_cast<size_t>(box.y1 + y) * image.width + box.x1];
    std::copy(src, src + out.width, &out.pixels[static_cast<size_t>(y) * out.width]);
  }
  return out;
}

GrayImage union_crop(const GrayImage& image, const BBox& a, const BBox& b) {
  if (!a.valid() || !b.valid()) throw ImageError("union crop with a degenerate box");
  return crop(image, box_union(a, b));
}

GrayImage resize_pad(const GrayImage& image, int target_height, int target_width) {
  if (target_height < 1 || target_width < 1)
    throw ImageError("resize_pad target must be at least 1x1");
  if (image.width < 1 || image.height < 1) throw ImageError("resize_pad input is empty");

  GrayImage out(target_width, target_height, kBackground);
  int content_w = image.width;
  int content_h = image.height;
  if (image.width <= target_width && image.height <= target_height) {
    for (int y = 0; y < content_h; ++y)
      for (int x = 0; x < content_w; ++x) out.at(x, y) = image.at(x, y);
    return out;
  }

  // One shared factor keeps the aspect ratio; the tighter dimension decides.
  const double ratio = std::min(static_cast<double>(target_height) / image.height,
                                static_cast<double>(target_width) / image.width);
  content_w = std::clamp(static_cast<int>(std::lround(image.width * ratio)), 1, target_width);
  content_h = std::clamp(static_cast<int>(std::lround(image.height * ratio)), 1, target_height);
  const double sx = static_cast<double>(image.width) / content_w;
  const double sy = static_cast<double>(image.height) / content_h;
  for (int y = 0; y < content_h; ++y)
    for (int x = 0; x < content_w; ++x) {
      const double v = sample_bilinear(image, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
      out.at(x, y) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  return out;
}

void copy_normalized(const GrayImage& image, float* dst) {
  const size_t n = image.pixels.size();
  for (size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(255 - image.pixels[i]) / 255.0f;
}

namespace {

struct Color {
  uint8_t r, g, b;
};

constexpr Color kBoxColor{120, 160, 200};
constexpr Color kHorizontalColor{40, 60, 220};
constexpr Color kVerticalColor{220, 40, 40};
constexpr Color kMismatchColor{230, 0, 230};

void put(RgbImage& img, int x, int y, Color c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  uint8_t* p = img.at(x, y);
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
}

void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Color c, int thickness) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    for (int ox = -(thickness / 2); ox <= thickness / 2; ++ox)
      for (int oy = -(thickness / 2); oy <= thickness / 2; ++oy)
        put(img, x0 + ox, y0 + oy, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void draw_box(RgbImage& img, const BBox& box, Color c) {
  draw_line(img, box.x1, box.y1, box.x2, box.y1, c, 1);
  draw_line(img, box.x1, box.y2, box.x2, box.y2, c, 1);
  draw_line(img, box.x1, box.y1, box.x1, box.y2, c, 1);
  draw_line(img, box.x2, box.y1, box.x2, box.y2, c, 1);
}

}  // namespace

RgbImage render_overlay(const GrayImage& image, const Table& table,
                        const std::vector<PairCandidate>* predictions) {
  RgbImage out(image.width, image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const uint8_t v = image.at(x, y);
      uint8_t* p = out.at(x, y);
      p[0] = p[1] = p[2] = v;
    }

  for (const Cell& cell : table.cells) draw_box(out, table.operative_box(cell), kBoxColor);

  auto center_of = [&table](int id) {
    const Cell* cell = table.find_cell(id);
    if (!cell) throw ImageError("overlay references missing cell " + std::to_string(id));
    const BBox& box = table.operative_box(*cell);
    return std::pair(static_cast<int>(std::lround(box.center_x())),
                     static_cast<int>(std::lround(box.center_y())));
  };
  auto draw_edge = [&](int a, int b, RelationLabel label, bool mismatch) {
    if (label == RelationLabel::kNone && !mismatch) return;
    const auto [ax, ay] = center_of(a);
    const auto [bx, by] = center_of(b);
    const Color c = mismatch ? kMismatchColor
                    : label == RelationLabel::kHorizontal ? kHorizontalColor
                                                          : kVerticalColor;
    draw_line(out, ax, ay, bx, by, c, mismatch ? 3 : 1);
  };

  if (!predictions) {
    for (const auto& [key, label] : table.relations) draw_edge(key.first, key.second, label, false);
    return out;
  }

  // Predicted edges, with disagreements against the table's relations (both
  // wrong labels and missed ground-truth edges) highlighted.
  std::set<RelationKey> seen;
  for (const PairCandidate& pc : *predictions) {
    const RelationKey key = make_relation_key(pc.a, pc.b);
    seen.insert(key);
    const bool mismatch = pc.label != table.label_between(pc.a, pc.b);
    draw_edge(key.first, key.second, pc.label, mismatch);
  }
  for (const auto& [key, label] : table.relations)
    if (label != RelationLabel::kNone && !seen.count(key))
      draw_edge(key.first, key.second, label, true);
  return out;
}

}  // namespace tsr
