#pragma once

#include <string>
#include <vector>

#include "tsr/table.hpp"

namespace tsr {

// One classified cell pair, the unit the structure recovery consumes. The
// ids refer to cells of the table being recovered.
struct LabeledPair {
  int a = 0;
  int b = 0;
  RelationLabel label = RelationLabel::kNone;
};

// Undirected relation graph: one node per cell, adjacency lists of cell ids
// split by relation kind. Lists are symmetric and sorted.
struct RelationGraph {
  struct Node {
    int id = 0;
    BBox box;  // operative box, used for seed selection and ordering
    std::vector<int> horizontal;
    std::vector<int> vertical;
  };
  std::vector<Node> nodes;

  const Node& find(int id) const;
};

RelationGraph build_relation_graph(const Table& table, const std::vector<LabeledPair>& pairs);

// Cells reachable from the top-most cell (minimum y1, ties by x1 then id)
// along horizontal edges only; sorted left to right. Throws on empty graphs.
std::vector<int> first_row(const RelationGraph& graph);

// Recovered table structure. Rows are found by repeatedly peeling the first
// row off the not-yet-assigned remainder, so every cell lands in exactly one
// row (isolated cells become singleton groups); columns work the same way
// with vertical edges, seeded at minimum x1. `unassigned` stays empty here:
// it exists so external producers can report cells excluded upstream.
struct StructureResult {
  std::vector<std::vector<int>> rows;      // each sorted by x1 ascending
  std::vector<std::vector<int>> columns;   // each sorted by y1 ascending
  std::vector<int> unassigned;

  std::string to_json() const;
  static StructureResult from_json(const std::string& text);
};

StructureResult recover_structure(const RelationGraph& graph);
StructureResult recover_structure(const Table& table, const std::vector<LabeledPair>& pairs);
// Recovery from the table's own relation map (the reference structure).
StructureResult recover_structure(const Table& table);

// Similarity between two structures over the same cell universe (throws
// std::invalid_argument otherwise). Exact means rows and columns are
// identical including their orderings; the scores are greedy best-Jaccard
// matchings averaged over max(#truth, #predicted) groups.
struct StructureMatch {
  bool exact = false;
  double row_score = 0.0;
  double column_score = 0.0;
  double overall = 0.0;  // mean of the two group scores
};

StructureMatch structure_match(const StructureResult& truth, const StructureResult& predicted);

}  // namespace tsr
