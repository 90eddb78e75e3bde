#include <algorithm>
#include <set>

#include "doctest.h"
#include "support/test_util.hpp"
#include "tsr/pairing.hpp"
#include "tsr/rng.hpp"

using namespace tsr;
using testutil::grid_table;

namespace {

std::vector<KdTree2::Entry> cloud(Rng& rng, int n, double span = 1000) {
  std::vector<KdTree2::Entry> entries;
  for (int i = 0; i < n; ++i)
    entries.push_back({{rng.uniform(0, span), rng.uniform(0, span)}, i});
  return entries;
}

}  // namespace

TEST_CASE("kd-tree equals brute force on random clouds") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = static_cast<int>(rng.range(1, 60));
    auto entries = cloud(rng, n);
    KdTree2 tree(entries);
    REQUIRE(tree.size() == static_cast<size_t>(n));
    for (int q = 0; q < 8; ++q) {
      Point2 query{rng.uniform(-100, 1100), rng.uniform(-100, 1100)};
      for (int k : {1, 3, 20}) {
        CHECK(tree.k_nearest(query, k) == testutil::brute_knn(entries, query, k));
      }
      const double radius = rng.uniform(0, 400);
      CHECK(tree.within_radius(query, radius) == testutil::brute_radius(entries, query, radius));
    }
  }
}

TEST_CASE("kd-tree breaks distance ties by id") {
  // Four entries on two coincident points.
  std::vector<KdTree2::Entry> entries = {
      {{5, 5}, 30}, {{5, 5}, 10}, {{9, 5}, 20}, {{9, 5}, 1}};
  KdTree2 tree(entries);
  CHECK(tree.k_nearest({5, 5}, 4) == std::vector<int>{10, 30, 1, 20});
  CHECK(tree.k_nearest({5, 5}, 3) == std::vector<int>{10, 30, 1});
}

TEST_CASE("kd-tree radius boundary is inclusive") {
  std::vector<KdTree2::Entry> entries = {{{0, 0}, 0}, {{3, 4}, 1}, {{6, 8}, 2}};
  KdTree2 tree(entries);
  CHECK(tree.within_radius({0, 0}, 5.0) == std::vector<int>{0, 1});
  CHECK(tree.within_radius({0, 0}, 4.999) == std::vector<int>{0});
  CHECK(tree.within_radius({0, 0}, 10.0) == std::vector<int>{0, 1, 2});
}

TEST_CASE("kd-tree respects exclusion and oversized k") {
  std::vector<KdTree2::Entry> entries = {{{0, 0}, 0}, {{1, 0}, 1}, {{2, 0}, 2}};
  KdTree2 tree(entries);
  CHECK(tree.k_nearest({0, 0}, 10, 0) == std::vector<int>{1, 2});
  CHECK(tree.k_nearest({0, 0}, 10) == std::vector<int>{0, 1, 2});
  KdTree2 empty(std::vector<KdTree2::Entry>{});
  CHECK(empty.k_nearest({0, 0}, 3).empty());
}

TEST_CASE("generate_pairs yields every pair of a small grid with large k") {
  Table t = grid_table(3, 3);
  derive_relations(t);
  auto pairs = generate_pairs(t, 20);
  CHECK(pairs.size() == 36);  // C(9,2): k=20 >= 8 neighbors each

  std::set<std::pair<int, int>> seen;
  for (const auto& p : pairs) {
    CHECK(p.a < p.b);
    CHECK(p.label == t.label_between(p.a, p.b));
    const BBox& ba = t.operative_box(*t.find_cell(p.a));
    const BBox& bb = t.operative_box(*t.find_cell(p.b));
    const double dx = ba.center_x() - bb.center_x();
    const double dy = ba.center_y() - bb.center_y();
    CHECK(p.distance == doctest::Approx(std::sqrt(dx * dx + dy * dy)));
    seen.insert({p.a, p.b});
  }
  CHECK(seen.size() == pairs.size());  // no duplicates

  // Sorted by (a, b).
  for (size_t i = 1; i < pairs.size(); ++i)
    CHECK(std::pair{pairs[i - 1].a, pairs[i - 1].b} < std::pair{pairs[i].a, pairs[i].b});
}

TEST_CASE("generate_pairs matches the brute-force candidate oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    Table t = testutil::random_cloud(rng, static_cast<int>(rng.range(2, 50)));
    for (int k : {1, 3, 20}) {
      auto pairs = generate_pairs(t, k);
      auto expected = testutil::brute_pairs(t, k);
      REQUIRE(pairs.size() == expected.size());
      for (size_t i = 0; i < pairs.size(); ++i) {
        CHECK(pairs[i].a == expected[i].first);
        CHECK(pairs[i].b == expected[i].second);
      }
    }
  }
}

TEST_CASE("candidate sets grow monotonically with k") {
  Rng rng(5);
  Table t = testutil::random_cloud(rng, 30);
  auto as_set = [](const std::vector<PairCandidate>& v) {
    std::set<std::pair<int, int>> s;
    for (const auto& p : v) s.insert({p.a, p.b});
    return s;
  };
  auto k1 = as_set(generate_pairs(t, 1));
  auto k3 = as_set(generate_pairs(t, 3));
  auto k20 = as_set(generate_pairs(t, 20));
  CHECK(std::includes(k3.begin(), k3.end(), k1.begin(), k1.end()));
  CHECK(std::includes(k20.begin(), k20.end(), k3.begin(), k3.end()));
}

TEST_CASE("generate_pairs rejects bad inputs") {
  Table t = grid_table(2, 2);
  CHECK_THROWS(generate_pairs(t, 0));
  CHECK_THROWS(generate_pairs(t, -3));
  Table lone = grid_table(1, 1);
  CHECK(generate_pairs(lone, 5).empty());  // no pair to form
}

TEST_CASE("generate_pairs uses the operative boxes of the table mode") {
  // Two cells whose aligned boxes are adjacent but whose text boxes are far
  // apart vertically; distances must follow the selected mode.
  Table t = grid_table(1, 2, 100, 60);
  t.cells[0].text_box = BBox{5, 5, 15, 15};
  t.cells[1].text_box = BBox{106, 45, 116, 55};
  auto aligned = generate_pairs(t, 3);
  t.box_mode = BoxMode::kTextFocused;
  auto text = generate_pairs(t, 3);
  REQUIRE(aligned.size() == 1);
  REQUIRE(text.size() == 1);
  CHECK(aligned[0].distance < text[0].distance);
}

TEST_CASE("pair generation is deterministic") {
  Rng rng(99);
  Table t = testutil::random_cloud(rng, 25);
  auto a = generate_pairs(t, 4);
  auto b = generate_pairs(t, 4);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].a == b[i].a);
    CHECK(a[i].b == b[i].b);
    CHECK(a[i].distance == b[i].distance);
  }
}
