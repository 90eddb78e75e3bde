#include "tsr/table.hpp"

#include <algorithm>

namespace tsr {
namespace {

constexpr int kGridLimit = 4096;  // sanity bound on logical rows/columns

// Dense map from logical grid slot to cell index, -1 when unoccupied.
struct Occupancy {
  int rows = 0;
  int cols = 0;
  std::vector<int> slot;

  int at(int r, int c) const { return slot[static_cast<size_t>(r) * cols + c]; }
};

Occupancy build_occupancy(const Table& table) {
  Occupancy occ;
  for (const Cell& cell : table.cells) {
    if (cell.row_start < 0 || cell.col_start < 0 || cell.row_end < cell.row_start ||
        cell.col_end < cell.col_start || cell.row_end >= kGridLimit ||
        cell.col_end >= kGridLimit)
      throw AnnotationError("cell " + std::to_string(cell.id) + " has an invalid grid rectangle");
    occ.rows = std::max(occ.rows, cell.row_end + 1);
    occ.cols = std::max(occ.cols, cell.col_end + 1);
  }
  occ.slot.assign(static_cast<size_t>(occ.rows) * occ.cols, -1);
  for (size_t i = 0; i < table.cells.size(); ++i) {
    const Cell& cell = table.cells[i];
    for (int r = cell.row_start; r <= cell.row_end; ++r)
      for (int c = cell.col_start; c <= cell.col_end; ++c) {
        int& s = occ.slot[static_cast<size_t>(r) * occ.cols + c];
        if (s != -1)
          throw AnnotationError("overlapping grid rectangles: cells " +
                                std::to_string(table.cells[s].id) + " and " +
                                std::to_string(cell.id));
        s = static_cast<int>(i);
      }
  }
  return occ;
}

// Adds one relation between two distinct non-empty cells.
void add_relation(RelationMap& rel, const Table& table, int cell_i, int cell_j,
                  RelationLabel label) {
  rel[make_relation_key(table.cells[cell_i].id, table.cells[cell_j].id)] = label;
}

// Scans each row (or column) and relates consecutive non-empty cells.
// When bridge_empties is false only directly touching cells are related; when
// true a run of empty cells between two non-empty cells also connects them.
void scan_lines(const Table& table, const Occupancy& occ, bool horizontal,
                bool bridge_empties, RelationMap& rel) {
  const int lines = horizontal ? occ.rows : occ.cols;
  const int steps = horizontal ? occ.cols : occ.rows;
  const RelationLabel label = horizontal ? RelationLabel::kHorizontal : RelationLabel::kVertical;
  for (int line = 0; line < lines; ++line) {
    int prev = -1;  // last non-empty cell seen, still connectable
    for (int step = 0; step < steps; ++step) {
      const int cur = horizontal ? occ.at(line, step) : occ.at(step, line);
      if (cur == -1) {
        prev = -1;  // hole in the grid breaks adjacency
      } else if (table.cells[cur].empty) {
        if (!bridge_empties) prev = -1;
      } else {
        if (prev != -1 && prev != cur) add_relation(rel, table, prev, cur, label);
        prev = cur;
      }
    }
  }
}

}  // namespace

void derive_relations(Table& table) {
  table.relations.clear();
  const Occupancy occ = build_occupancy(table);
  scan_lines(table, occ, /*horizontal=*/true, /*bridge_empties=*/false, table.relations);
  scan_lines(table, occ, /*horizontal=*/false, /*bridge_empties=*/false, table.relations);
}

Table apply_empty_cell_policy(const Table& table, BoxMode mode) {
  if (mode == BoxMode::kAligned) return table;

  for (const Cell& cell : table.cells)
    if (!cell.empty && !cell.text_box)
      throw AnnotationError("cell " + std::to_string(cell.id) +
                            " lacks a text box required for text_focused mode");

  // Bridged relations are computed on the original grid, where the runs of
  // empty cells are still visible.
  const Occupancy occ = build_occupancy(table);
  RelationMap bridged;
  scan_lines(table, occ, true, /*bridge_empties=*/true, bridged);
  scan_lines(table, occ, false, /*bridge_empties=*/true, bridged);

  Table out;
  out.id = table.id;
  out.image_path = table.image_path;
  out.width = table.width;
  out.height = table.height;
  out.box_mode = BoxMode::kTextFocused;
  for (const Cell& cell : table.cells)
    if (!cell.empty) out.cells.push_back(cell);

  for (const auto& [key, label] : table.relations)
    if (out.find_cell(key.first) && out.find_cell(key.second)) out.relations[key] = label;
  for (const auto& [key, label] : bridged) out.relations[key] = label;
  return out;
}

std::vector<Diagnostic> validate_table(const Table& table) {
  std::vector<Diagnostic> diags;
  auto report = [&diags](const char* code, std::string message) {
    diags.push_back(Diagnostic{code, std::move(message)});
  };

  if (table.width <= 0 || table.height <= 0)
    report("bad-image-size", "table image size is " + std::to_string(table.width) + "x" +
                                 std::to_string(table.height));

  std::map<int, int> id_count;
  for (const Cell& cell : table.cells) ++id_count[cell.id];
  for (const auto& [id, count] : id_count)
    if (count > 1) report("duplicate-id", "cell id " + std::to_string(id) + " appears " +
                                              std::to_string(count) + " times");

  BBox image_box{0, 0, table.width - 1, table.height - 1};
  for (const Cell& cell : table.cells) {
    const std::string tag = "cell " + std::to_string(cell.id);
    if (!cell.aligned_box.valid())
      report("degenerate-box", tag + " has a degenerate aligned box");
    else if (table.width > 0 && table.height > 0 && !image_box.contains(cell.aligned_box))
      report("box-out-of-image", tag + " aligned box escapes the image");
    if (cell.text_box) {
      if (!cell.text_box->valid())
        report("degenerate-box", tag + " has a degenerate text box");
      else if (cell.aligned_box.valid() && !cell.aligned_box.contains(*cell.text_box))
        report("text-box-outside-aligned", tag + " text box escapes its aligned box");
    }
    if (cell.row_start < 0 || cell.col_start < 0 || cell.row_end < cell.row_start ||
        cell.col_end < cell.col_start)
      report("invalid-grid", tag + " has an invalid grid rectangle");
  }

  for (size_t i = 0; i < table.cells.size(); ++i)
    for (size_t j = i + 1; j < table.cells.size(); ++j) {
      const Cell& a = table.cells[i];
      const Cell& b = table.cells[j];
      const bool overlap = a.row_start <= b.row_end && b.row_start <= a.row_end &&
                           a.col_start <= b.col_end && b.col_start <= a.col_end;
      if (overlap)
        report("grid-overlap", "cells " + std::to_string(a.id) + " and " +
                                   std::to_string(b.id) + " overlap in the grid");
    }

  for (const auto& [key, label] : table.relations) {
    (void)label;
    if (key.first >= key.second)
      report("unnormalized-relation", "relation (" + std::to_string(key.first) + "," +
                                          std::to_string(key.second) +
                                          ") is not stored with the lower id first");
    for (int id : {key.first, key.second})
      if (!table.find_cell(id))
        report("dangling-relation", "relation references missing cell " + std::to_string(id));
  }
  return diags;
}

}  // namespace tsr
