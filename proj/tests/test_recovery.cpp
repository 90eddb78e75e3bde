#include <algorithm>

#include "doctest.h"
#include "support/test_util.hpp"
#include "tsr/pairing.hpp"
#include "tsr/recovery.hpp"
#include "tsr/synthgen.hpp"

using namespace tsr;

namespace {

std::vector<LabeledPair> truth_pairs(const Table& table) {
  std::vector<LabeledPair> pairs;
  for (const auto& [key, label] : table.relations)
    pairs.push_back({key.first, key.second, label});
  return pairs;
}

// Expected partition of a span-free grid straight from the grid indices.
StructureResult grid_truth(const Table& table) {
  int max_row = -1, max_col = -1;
  for (const Cell& c : table.cells) {
    max_row = std::max(max_row, c.row_start);
    max_col = std::max(max_col, c.col_start);
  }
  StructureResult out;
  out.rows.resize(static_cast<size_t>(max_row + 1));
  out.columns.resize(static_cast<size_t>(max_col + 1));
  for (const Cell& c : table.cells) {
    out.rows[static_cast<size_t>(c.row_start)].push_back(c.id);
    out.columns[static_cast<size_t>(c.col_start)].push_back(c.id);
  }
  auto box_of = [&](int id) { return table.find_cell(id)->aligned_box; };
  for (auto& row : out.rows)
    std::sort(row.begin(), row.end(), [&](int a, int b) {
      const BBox& ba = box_of(a);
      const BBox& bb = box_of(b);
      return std::tie(ba.x1, ba.y1, a) < std::tie(bb.x1, bb.y1, b);
    });
  for (auto& col : out.columns)
    std::sort(col.begin(), col.end(), [&](int a, int b) {
      const BBox& ba = box_of(a);
      const BBox& bb = box_of(b);
      return std::tie(ba.y1, ba.x1, a) < std::tie(bb.y1, bb.x1, b);
    });
  return out;
}

}  // namespace

TEST_CASE("relation graph construction and its guards") {
  Table t = testutil::grid_table(2, 2);
  auto pairs = truth_pairs(t);
  RelationGraph g = build_relation_graph(t, pairs);
  REQUIRE(g.nodes.size() == 4);

  // Adjacency is symmetric and sorted.
  const auto& n0 = g.find(0);
  CHECK(n0.horizontal == std::vector<int>{1});
  CHECK(n0.vertical == std::vector<int>{2});
  const auto& n3 = g.find(3);
  CHECK(n3.horizontal == std::vector<int>{2});
  CHECK(n3.vertical == std::vector<int>{1});
  CHECK_THROWS_AS(g.find(99), std::invalid_argument);

  CHECK_THROWS_AS(build_relation_graph(t, {{0, 0, RelationLabel::kHorizontal}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_relation_graph(t, {{0, 42, RelationLabel::kHorizontal}}),
                  std::invalid_argument);
}

TEST_CASE("first row follows horizontal edges from the top-left cell") {
  Table t = testutil::grid_table(2, 3);
  RelationGraph g = build_relation_graph(t, truth_pairs(t));
  CHECK(first_row(g) == std::vector<int>{0, 1, 2});

  RelationGraph empty;
  CHECK_THROWS_AS(first_row(empty), std::invalid_argument);
}

TEST_CASE("plain 2x2 grid recovers rows and columns exactly") {
  Table t = testutil::grid_table(2, 2);
  StructureResult s = recover_structure(t, truth_pairs(t));
  REQUIRE(s.rows.size() == 2);
  REQUIRE(s.columns.size() == 2);
  CHECK(s.rows[0] == std::vector<int>{0, 1});
  CHECK(s.rows[1] == std::vector<int>{2, 3});
  CHECK(s.columns[0] == std::vector<int>{0, 2});
  CHECK(s.columns[1] == std::vector<int>{1, 3});
  CHECK(s.unassigned.empty());
}

TEST_CASE("a cell with no relations becomes its own row and column") {
  Table t = testutil::grid_table(1, 2);
  // Drop all relations: both cells are isolated.
  StructureResult s = recover_structure(t, {});
  CHECK(s.rows.size() == 2);
  CHECK(s.columns.size() == 2);
  for (const auto& row : s.rows) CHECK(row.size() == 1);
}

TEST_CASE("header spanning two columns lands in one row and one merged column") {
  // H covers columns 0-1 of row 0; C and D sit underneath.
  Table t;
  t.id = 500;
  t.width = 121;
  t.height = 61;
  Cell h;
  h.id = 10;
  h.aligned_box = {1, 1, 119, 29};
  h.row_start = h.row_end = 0;
  h.col_start = 0;
  h.col_end = 1;
  Cell c;
  c.id = 11;
  c.aligned_box = {1, 31, 59, 59};
  c.row_start = c.row_end = 1;
  c.col_start = c.col_end = 0;
  Cell d;
  d.id = 12;
  d.aligned_box = {61, 31, 119, 59};
  d.row_start = d.row_end = 1;
  d.col_start = d.col_end = 1;
  t.cells = {h, c, d};
  derive_relations(t);

  StructureResult s = recover_structure(t, truth_pairs(t));
  REQUIRE(s.rows.size() == 2);
  CHECK(s.rows[0] == std::vector<int>{10});
  CHECK(s.rows[1] == std::vector<int>{11, 12});
  // The vertical edges H-C and H-D merge everything into one column group.
  REQUIRE(s.columns.size() == 1);
  CHECK(s.columns[0] == std::vector<int>{10, 11, 12});
}

TEST_CASE("structure match compares ordered groups") {
  StructureResult a;
  a.rows = {{0, 1}, {2, 3}};
  a.columns = {{0, 2}, {1, 3}};
  StructureResult b = a;
  StructureMatch exact = structure_match(a, b);
  CHECK(exact.exact);
  CHECK(exact.row_score == doctest::Approx(1.0));
  CHECK(exact.column_score == doctest::Approx(1.0));
  CHECK(exact.overall == doctest::Approx(1.0));

  // Same groups, different group order: not exact, but scores stay perfect.
  StructureResult shuffled;
  shuffled.rows = {{2, 3}, {0, 1}};
  shuffled.columns = a.columns;
  StructureMatch near = structure_match(a, shuffled);
  CHECK(!near.exact);
  CHECK(near.row_score == doctest::Approx(1.0));

  // Disjoint universes are a usage error, not a zero score.
  StructureResult alien;
  alien.rows = {{7, 8}};
  alien.columns = {{7}, {8}};
  CHECK_THROWS_AS(structure_match(a, alien), std::invalid_argument);
}

TEST_CASE("greedy overlap scoring on a split row") {
  StructureResult truth;
  truth.rows = {{1, 2}, {3}};
  truth.columns = {{1, 3}, {2}};
  StructureResult pred;
  pred.rows = {{1}, {2, 3}};
  pred.columns = truth.columns;
  StructureMatch m = structure_match(truth, pred);
  CHECK(!m.exact);
  // Best Jaccard per truth row: {1,2}->{1} = 1/2, {3}->{2,3} = 1/2; mean 0.5.
  CHECK(m.row_score == doctest::Approx(0.5));
  CHECK(m.column_score == doctest::Approx(1.0));
  CHECK(m.overall == doctest::Approx(0.75));
}

TEST_CASE("structure result json round trip") {
  StructureResult s;
  s.rows = {{4, 5}, {6}};
  s.columns = {{4, 6}, {5}};
  s.unassigned = {9};
  StructureResult back = StructureResult::from_json(s.to_json());
  CHECK(back.rows == s.rows);
  CHECK(back.columns == s.columns);
  CHECK(back.unassigned == s.unassigned);
}

TEST_CASE("span-free synthetic tables recover their grid exactly") {
  GenParams params = style_profile('a');
  params.span_prob = 0.0;
  params.empty_prob = 0.0;
  params.seed = 77;
  for (int i = 0; i < 20; ++i) {
    SynthItem item = generate_table(params, i);
    StructureResult recovered = recover_structure(item.table);
    StructureResult expected = grid_truth(item.table);
    StructureMatch m = structure_match(expected, recovered);
    CHECK(m.exact);
  }
}

TEST_CASE("recovery from model-style pairs matches recovery from the table") {
  Table t = testutil::grid_table(3, 4);
  auto candidates = generate_pairs(t, 20);
  std::vector<LabeledPair> labeled;
  for (const auto& pc : candidates) labeled.push_back({pc.a, pc.b, pc.label});
  StructureResult via_pairs = recover_structure(t, labeled);
  StructureResult direct = recover_structure(t);
  CHECK(structure_match(direct, via_pairs).exact);
}
