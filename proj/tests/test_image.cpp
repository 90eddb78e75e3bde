#include <filesystem>

#include "doctest.h"
#include "support/test_util.hpp"
#include "tsr/image.hpp"
#include "tsr/png_io.hpp"
#include "tsr/rng.hpp"

using namespace tsr;

namespace {

GrayImage numbered(int w, int h) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<uint8_t>(y * 16 + x);
  return img;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "tsr_image_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

int count_color(const RgbImage& img, uint8_t r, uint8_t g, uint8_t b) {
  int n = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const uint8_t* p = img.at(x, y);
      if (p[0] == r && p[1] == g && p[2] == b) ++n;
    }
  return n;
}

}  // namespace

TEST_CASE("crop copies the exact inclusive region") {
  GrayImage img = numbered(5, 4);
  GrayImage out = crop(img, {1, 1, 3, 2});
  REQUIRE(out.width == 3);
  REQUIRE(out.height == 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x) CHECK(out.at(x, y) == img.at(x + 1, y + 1));

  GrayImage single = crop(img, {4, 3, 4, 3});
  REQUIRE(single.width == 1);
  CHECK(single.at(0, 0) == img.at(4, 3));
}

TEST_CASE("crop rejects boxes that escape or degenerate") {
  GrayImage img = numbered(5, 4);
  CHECK_THROWS_AS(crop(img, {0, 0, 5, 3}), ImageError);
  CHECK_THROWS_AS(crop(img, {-1, 0, 2, 2}), ImageError);
  CHECK_THROWS_AS(crop(img, {3, 0, 2, 2}), ImageError);
}

TEST_CASE("union crop equals the crop of the union box") {
  GrayImage img = numbered(12, 9);
  const BBox a{1, 2, 4, 5};
  const BBox b{6, 0, 9, 3};
  GrayImage u = union_crop(img, a, b);
  GrayImage direct = crop(img, box_union(a, b));
  CHECK(u.width == direct.width);
  CHECK(u.height == direct.height);
  CHECK(u.pixels == direct.pixels);
  CHECK(u.width == 9);   // x 1..9
  CHECK(u.height == 6);  // y 0..5
}

TEST_CASE("resize_pad keeps small content at original scale, top-left") {
  GrayImage img = numbered(3, 2);
  GrayImage out = resize_pad(img, 5, 6);
  REQUIRE(out.width == 6);
  REQUIRE(out.height == 5);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x) CHECK(out.at(x, y) == img.at(x, y));
  CHECK(out.at(3, 0) == kBackground);
  CHECK(out.at(0, 2) == kBackground);
  CHECK(out.at(5, 4) == kBackground);
}

TEST_CASE("resize_pad shrinks oversized content by one shared factor") {
  GrayImage img(200, 100, 100);  // uniform gray
  GrayImage out = resize_pad(img, 84, 84);
  REQUIRE(out.width == 84);
  REQUIRE(out.height == 84);
  // ratio = min(84/100, 84/200) = 0.42 -> content is 84x42.
  for (int y = 0; y < 42; ++y)
    for (int x = 0; x < 84; ++x) CHECK(out.at(x, y) == 100);
  for (int y = 42; y < 84; ++y)
    for (int x = 0; x < 84; ++x) CHECK(out.at(x, y) == kBackground);
}

TEST_CASE("resize_pad bilinear sampling at half-pixel centers") {
  GrayImage img(4, 1);
  img.at(0, 0) = 0;
  img.at(1, 0) = 255;
  img.at(2, 0) = 0;
  img.at(3, 0) = 255;
  GrayImage out = resize_pad(img, 1, 2);
  REQUIRE(out.width == 2);
  REQUIRE(out.height == 1);
  // Samples land exactly between neighbors: (0+255)/2 = 127.5 -> 128.
  CHECK(out.at(0, 0) == 128);
  CHECK(out.at(1, 0) == 128);
}

TEST_CASE("resize_pad guards its arguments") {
  GrayImage img = numbered(4, 4);
  CHECK_THROWS_AS(resize_pad(img, 0, 5), ImageError);
  CHECK_THROWS_AS(resize_pad(GrayImage{}, 5, 5), ImageError);
}

TEST_CASE("copy_normalized maps ink to one and background to zero") {
  GrayImage img(3, 1);
  img.at(0, 0) = 0;
  img.at(1, 0) = 255;
  img.at(2, 0) = 128;
  float dst[3];
  copy_normalized(img, dst);
  CHECK(dst[0] == doctest::Approx(1.0f));
  CHECK(dst[1] == doctest::Approx(0.0f));
  CHECK(dst[2] == doctest::Approx(127.0f / 255.0f));
}

TEST_CASE("png round trip is lossless for gray images") {
  Rng rng(7);
  GrayImage img(37, 23);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(rng.range(0, 255));
  const auto path = (temp_dir() / "roundtrip.png").string();
  write_png(img, path);
  GrayImage back = read_png_gray(path);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("png io reports file errors") {
  CHECK_THROWS_AS(read_png_gray((temp_dir() / "missing.png").string()), ImageError);
  GrayImage img(4, 4);
  CHECK_THROWS_AS(write_png(img, (temp_dir() / "no_such_dir" / "x.png").string()), ImageError);
}

TEST_CASE("rgb png writes without error") {
  RgbImage img(8, 5);
  img.at(2, 2)[0] = 10;
  const auto path = (temp_dir() / "rgb.png").string();
  write_png(img, path);
  CHECK(std::filesystem::exists(path));
}

TEST_CASE("overlay draws truth edges in the relation colors") {
  Table t = testutil::grid_table(2, 2);
  derive_relations(t);
  GrayImage img(t.width, t.height);
  RgbImage out = render_overlay(img, t);
  REQUIRE(out.width == t.width);
  REQUIRE(out.height == t.height);
  CHECK(count_color(out, 40, 60, 220) > 0);   // horizontal edges
  CHECK(count_color(out, 220, 40, 40) > 0);   // vertical edges
  CHECK(count_color(out, 230, 0, 230) == 0);  // nothing to disagree with
}

TEST_CASE("overlay highlights wrong and missing predictions") {
  Table t = testutil::grid_table(2, 2);
  derive_relations(t);
  GrayImage img(t.width, t.height);

  // Wrong label on the (0,1) pair and nothing predicted elsewhere: both the
  // wrong edge and the missed truth edges show up as mismatch ink.
  std::vector<PairCandidate> preds = {{0, 1, RelationLabel::kVertical, 0.0}};
  RgbImage out = render_overlay(img, t, &preds);
  CHECK(count_color(out, 230, 0, 230) > 0);

  // A perfect prediction set shows no mismatch ink.
  std::vector<PairCandidate> perfect;
  for (const auto& [key, label] : t.relations) perfect.push_back({key.first, key.second, label, 0.0});
  RgbImage clean = render_overlay(img, t, &perfect);
  CHECK(count_color(clean, 230, 0, 230) == 0);
}
