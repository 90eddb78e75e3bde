#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tsr/geometry.hpp"

namespace tsr {

// Pair relation classes. Values are the classifier's label encoding.
enum class RelationLabel : int {
  kNone = 0,
  kVertical = 1,    // same column, vertically adjacent
  kHorizontal = 2,  // same row, horizontally adjacent
};

inline const char* to_string(RelationLabel label) {
  switch (label) {
    case RelationLabel::kNone: return "none";
    case RelationLabel::kVertical: return "vertical";
    case RelationLabel::kHorizontal: return "horizontal";
  }
  return "?";
}

// Which box downstream stages (pairing, cropping, recovery) operate on.
enum class BoxMode { kAligned, kTextFocused };

inline const char* to_string(BoxMode mode) {
  return mode == BoxMode::kAligned ? "aligned" : "text_focused";
}

struct AnnotationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One table cell. Grid coordinates are inclusive ranges of logical rows and
// columns; a spanning cell covers more than one row or column.
struct Cell {
  int id = 0;
  BBox aligned_box;
  std::optional<BBox> text_box;  // absent for empty cells
  int row_start = 0;
  int row_end = 0;
  int col_start = 0;
  int col_end = 0;
  bool empty = false;
};

// Relation keys are stored once per unordered pair, with the lower id first.
using RelationKey = std::pair<int, int>;
using RelationMap = std::map<RelationKey, RelationLabel>;

inline RelationKey make_relation_key(int a, int b) {
  if (a == b) throw AnnotationError("relation key with identical ids: " + std::to_string(a));
  return a < b ? RelationKey{a, b} : RelationKey{b, a};
}

struct Table {
  int id = 0;
  std::string image_path;
  int width = 0;
  int height = 0;
  std::vector<Cell> cells;
  RelationMap relations;
  BoxMode box_mode = BoxMode::kAligned;

  const Cell* find_cell(int id) const {
    for (const Cell& c : cells)
      if (c.id == id) return &c;
    return nullptr;
  }

  // Box used by geometry-dependent stages under the table's current mode.
  const BBox& operative_box(const Cell& cell) const {
    if (box_mode == BoxMode::kTextFocused) {
      if (!cell.text_box)
        throw AnnotationError("cell " + std::to_string(cell.id) +
                              " has no text box in text_focused mode");
      return *cell.text_box;
    }
    return cell.aligned_box;
  }

  // Label for an unordered pair; unrelated pairs read as kNone.
  RelationLabel label_between(int a, int b) const {
    auto it = relations.find(make_relation_key(a, b));
    return it == relations.end() ? RelationLabel::kNone : it->second;
  }
};

// Fills table.relations from grid coordinates. Two non-empty cells are
// horizontally related iff they share a logical row and their column ranges
// touch (left.col_end + 1 == right.col_start); vertically related iff they
// share a column and their row ranges touch. Empty cells get no relations.
// Throws AnnotationError when grid rectangles overlap.
void derive_relations(Table& table);

// Transforms a table for the requested box mode. kAligned returns the input
// unchanged. kTextFocused removes empty cells, keeps relations between
// surviving cells, and bridges pairs of non-empty cells that are separated
// only by a run of empty cells in a shared row (horizontal) or column
// (vertical). Requires a text box on every non-empty cell. Idempotent.
Table apply_empty_cell_policy(const Table& table, BoxMode mode);

struct Diagnostic {
  std::string code;
  std::string message;
};

// Reports all invariant violations without throwing: duplicate ids,
// degenerate or out-of-image boxes, text boxes escaping aligned boxes,
// invalid or overlapping grid rectangles, dangling or unnormalized relations.
std::vector<Diagnostic> validate_table(const Table& table);

}  // namespace tsr
