#include "tsr/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

namespace tsr {
namespace {

double dist2(Point2 a, Point2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct Candidate {
  double d2;
  int id;
};

// True when a ranks strictly closer than b (lower id wins distance ties).
bool better(const Candidate& a, const Candidate& b) {
  return a.d2 < b.d2 || (a.d2 == b.d2 && a.id < b.id);
}

}  // namespace

KdTree2::KdTree2(std::vector<Entry> entries) {
  nodes_.reserve(entries.size());
  if (!entries.empty()) root_ = build(entries, 0, static_cast<int>(entries.size()), 0);
}

int KdTree2::build(std::vector<Entry>& entries, int lo, int hi, int axis) {
  if (lo >= hi) return -1;
  const int mid = lo + (hi - lo) / 2;
  auto key = [axis](const Entry& e) {
    return axis == 0 ? std::pair(e.p.x, e.id) : std::pair(e.p.y, e.id);
  };
  std::nth_element(entries.begin() + lo, entries.begin() + mid, entries.begin() + hi,
                   [&key](const Entry& a, const Entry& b) { return key(a) < key(b); });
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{entries[mid].p, entries[mid].id, -1, -1, axis});
  nodes_[index].left = build(entries, lo, mid, 1 - axis);
  nodes_[index].right = build(entries, mid + 1, hi, 1 - axis);
  return index;
}

std::vector<int> KdTree2::k_nearest(Point2 q, int k, int exclude_id) const {
  if (k < 1) throw std::invalid_argument("k_nearest requires k >= 1");
  // Max-heap on rank: the top is the worst of the best-k found so far.
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(&better)> best(&better);

  auto visit = [&](auto&& self, int node_index) -> void {
    if (node_index == -1) return;
    const Node& node = nodes_[node_index];
    if (node.id != exclude_id) {
      Candidate c{dist2(q, node.p), node.id};
      if (static_cast<int>(best.size()) < k) {
        best.push(c);
      } else if (better(c, best.top())) {
        best.pop();
        best.push(c);
      }
    }
    const double diff = node.axis == 0 ? q.x - node.p.x : q.y - node.p.y;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    self(self, near);
    // The far side can still hold a winner when its best possible distance
    // does not exceed the current worst (equal distances may win by id).
    if (static_cast<int>(best.size()) < k || diff * diff <= best.top().d2) self(self, far);
  };
  visit(visit, root_);

  std::vector<Candidate> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::sort(out.begin(), out.end(), better);
  std::vector<int> ids;
  ids.reserve(out.size());
  for (const Candidate& c : out) ids.push_back(c.id);
  return ids;
}

std::vector<int> KdTree2::within_radius(Point2 q, double radius, int exclude_id) const {
  if (radius < 0) throw std::invalid_argument("within_radius requires radius >= 0");
  const double r2 = radius * radius;
  std::vector<Candidate> hits;
  auto visit = [&](auto&& self, int node_index) -> void {
    if (node_index == -1) return;
    const Node& node = nodes_[node_index];
    const double d2v = dist2(q, node.p);
    if (node.id != exclude_id && d2v <= r2) hits.push_back(Candidate{d2v, node.id});
    const double diff = node.axis == 0 ? q.x - node.p.x : q.y - node.p.y;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    self(self, near);
    if (diff * diff <= r2) self(self, far);
  };
  visit(visit, root_);
  std::sort(hits.begin(), hits.end(), better);
  std::vector<int> ids;
  ids.reserve(hits.size());
  for (const Candidate& c : hits) ids.push_back(c.id);
  return ids;
}

KdTree2 build_spatial_index(const Table& table) {
  std::vector<KdTree2::Entry> entries;
  entries.reserve(table.cells.size());
  for (const Cell& cell : table.cells) {
    const BBox& box = table.operative_box(cell);
    entries.push_back({Point2{box.center_x(), box.center_y()}, cell.id});
  }
  return KdTree2(std::move(entries));
}

std::vector<PairCandidate> generate_pairs(const Table& table, int k) {
  if (k < 1) throw std::invalid_argument("generate_pairs requires k >= 1");
  const KdTree2 index = build_spatial_index(table);

  std::set<RelationKey> keys;
  for (const Cell& cell : table.cells) {
    const BBox& box = table.operative_box(cell);
    for (int other : index.k_nearest(Point2{box.center_x(), box.center_y()}, k, cell.id))
      keys.insert(make_relation_key(cell.id, other));
  }

  std::vector<PairCandidate> pairs;
  pairs.reserve(keys.size());
  for (const RelationKey& key : keys) {
    const Cell* a = table.find_cell(key.first);
    const Cell* b = table.find_cell(key.second);
    const BBox& box_a = table.operative_box(*a);
    const BBox& box_b = table.operative_box(*b);
    PairCandidate pc;
    pc.a = key.first;
    pc.b = key.second;
    pc.label = table.label_between(key.first, key.second);
    pc.distance = std::sqrt(dist2(Point2{box_a.center_x(), box_a.center_y()},
                                  Point2{box_b.center_x(), box_b.center_y()}));
    pairs.push_back(pc);
  }
  return pairs;  // std::set iteration already yields (a, b) order
}

}  // namespace tsr
