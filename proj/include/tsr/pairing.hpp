#pragma once

#include <cstdint>
#include <vector>

#include "tsr/table.hpp"

namespace tsr {

// Neighbor count used when callers do not override it.
inline constexpr int kDefaultNeighborCount = 20;

struct Point2 {
  double x = 0;
  double y = 0;
};

// Exact 2-d KD-tree over labelled points. Queries are exact: results are
// ordered by Euclidean distance, with equal distances broken by the lower id,
// so duplicate coordinates behave deterministically.
class KdTree2 {
 public:
  struct Entry {
    Point2 p;
    int id = 0;
  };

  explicit KdTree2(std::vector<Entry> entries);

  size_t size() const { return nodes_.size(); }

  // Up to k nearest entries to q, excluding entries whose id == exclude_id.
  // Ordered by (distance, id) ascending.
  std::vector<int> k_nearest(Point2 q, int k, int exclude_id = -1) const;

  // All entries within `radius` of q (inclusive), same ordering and exclusion.
  std::vector<int> within_radius(Point2 q, double radius, int exclude_id = -1) const;

 private:
  struct Node {
    Point2 p;
    int id = 0;
    int left = -1;
    int right = -1;
    int axis = 0;
  };

  int build(std::vector<Entry>& entries, int lo, int hi, int axis);

  std::vector<Node> nodes_;
  int root_ = -1;
};

// Candidate cell pair for classification. Ids satisfy a < b; the label is the
// ground-truth relation (kNone when the cells are unrelated); distance is the
// Euclidean distance between operative-box centers.
struct PairCandidate {
  int a = 0;
  int b = 0;
  RelationLabel label = RelationLabel::kNone;
  double distance = 0.0;
};

// Spatial index over a table's operative-box centers.
KdTree2 build_spatial_index(const Table& table);

// Candidate set: the union over every cell of its k nearest neighbors, as
// unordered pairs, deduplicated and sorted by (a, b). k must be >= 1.
std::vector<PairCandidate> generate_pairs(const Table& table, int k = kDefaultNeighborCount);

}  // namespace tsr
