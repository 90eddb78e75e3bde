#include "tsr/recovery.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

namespace tsr {
namespace {

using nlohmann::json;

std::map<int, int> index_by_id(const RelationGraph& graph) {
  std::map<int, int> index;
  for (size_t i = 0; i < graph.nodes.size(); ++i) index.emplace(graph.nodes[i].id, static_cast<int>(i));
  return index;
}

// Peels one group: BFS from the minimum-key unassigned cell along one edge
// kind. Keys are (y1,x1,id) for rows and (x1,y1,id) for columns.
std::vector<int> peel_group(const RelationGraph& graph, const std::map<int, int>& index,
                            std::vector<bool>& assigned, bool horizontal) {
  auto seed_key = [&graph, horizontal](int i) {
    const auto& node = graph.nodes[static_cast<size_t>(i)];
    return horizontal ? std::make_tuple(node.box.y1, node.box.x1, node.id)
                      : std::make_tuple(node.box.x1, node.box.y1, node.id);
  };
  int seed = -1;
  for (int i = 0; i < static_cast<int>(graph.nodes.size()); ++i) {
    if (assigned[static_cast<size_t>(i)]) continue;
    if (seed == -1 || seed_key(i) < seed_key(seed)) seed = i;
  }
  if (seed == -1) return {};

  std::vector<int> members;
  std::queue<int> frontier;
  frontier.push(seed);
  assigned[static_cast<size_t>(seed)] = true;
  while (!frontier.empty()) {
    const int cur = frontier.front();
    frontier.pop();
    members.push_back(cur);
    const auto& node = graph.nodes[static_cast<size_t>(cur)];
    for (int next_id : horizontal ? node.horizontal : node.vertical) {
      const int next = index.at(next_id);
      if (assigned[static_cast<size_t>(next)]) continue;
      assigned[static_cast<size_t>(next)] = true;
      frontier.push(next);
    }
  }
  auto member_key = [&graph, horizontal](int i) {
    const auto& node = graph.nodes[static_cast<size_t>(i)];
    return horizontal ? std::make_tuple(node.box.x1, node.box.y1, node.id)
                      : std::make_tuple(node.box.y1, node.box.x1, node.id);
  };
  std::sort(members.begin(), members.end(),
            [&member_key](int a, int b) { return member_key(a) < member_key(b); });
  std::vector<int> ids;
  ids.reserve(members.size());
  for (int i : members) ids.push_back(graph.nodes[static_cast<size_t>(i)].id);
  return ids;
}

std::vector<std::vector<int>> extract_groups(const RelationGraph& graph,
                                             const std::map<int, int>& index, bool horizontal) {
  std::vector<bool> assigned(graph.nodes.size(), false);
  std::vector<std::vector<int>> groups;
  while (true) {
    std::vector<int> group = peel_group(graph, index, assigned, horizontal);
    if (group.empty()) break;
    groups.push_back(std::move(group));
  }
  return groups;
}

double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> sa = a, sb = b, common;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  const double inter = static_cast<double>(common.size());
  const double uni = static_cast<double>(sa.size() + sb.size()) - inter;
  return uni == 0.0 ? 0.0 : inter / uni;
}

double group_score(const std::vector<std::vector<int>>& truth,
                   const std::vector<std::vector<int>>& predicted) {
  if (truth.empty() && predicted.empty()) return 1.0;
  if (truth.empty() || predicted.empty()) return 0.0;
  struct Candidate {
    double score;
    size_t t, p;
  };
  std::vector<Candidate> candidates;
  for (size_t t = 0; t < truth.size(); ++t)
    for (size_t p = 0; p < predicted.size(); ++p) {
      const double s = jaccard(truth[t], predicted[p]);
      if (s > 0.0) candidates.push_back({s, t, p});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.t != b.t) return a.t < b.t;
    return a.p < b.p;
  });
  std::vector<bool> used_t(truth.size(), false), used_p(predicted.size(), false);
  double sum = 0.0;
  for (const Candidate& c : candidates) {
    if (used_t[c.t] || used_p[c.p]) continue;
    used_t[c.t] = used_p[c.p] = true;
    sum += c.score;
  }
  return sum / static_cast<double>(std::max(truth.size(), predicted.size()));
}

std::set<int> universe(const StructureResult& s) {
  std::set<int> ids;
  for (const auto& group : s.rows) ids.insert(group.begin(), group.end());
  for (const auto& group : s.columns) ids.insert(group.begin(), group.end());
  ids.insert(s.unassigned.begin(), s.unassigned.end());
  return ids;
}

}  // namespace

const RelationGraph::Node& RelationGraph::find(int id) const {
  for (const Node& node : nodes)
    if (node.id == id) return node;
  throw std::invalid_argument("no graph node with id " + std::to_string(id));
}

RelationGraph build_relation_graph(const Table& table, const std::vector<LabeledPair>& pairs) {
  RelationGraph graph;
  graph.nodes.reserve(table.cells.size());
  std::map<int, int> index;
  for (const Cell& cell : table.cells) {
    if (!index.emplace(cell.id, static_cast<int>(graph.nodes.size())).second)
      throw std::invalid_argument("duplicate cell id " + std::to_string(cell.id));
    graph.nodes.push_back(RelationGraph::Node{cell.id, table.operative_box(cell), {}, {}});
  }
  for (const LabeledPair& pair : pairs) {
    if (pair.a == pair.b) throw std::invalid_argument("labeled pair relates a cell to itself");
    auto ia = index.find(pair.a);
    auto ib = index.find(pair.b);
    if (ia == index.end() || ib == index.end())
      throw std::invalid_argument("labeled pair references a cell not in the table");
    if (pair.label == RelationLabel::kNone) continue;
    auto& na = graph.nodes[static_cast<size_t>(ia->second)];
    auto& nb = graph.nodes[static_cast<size_t>(ib->second)];
    if (pair.label == RelationLabel::kHorizontal) {
      na.horizontal.push_back(pair.b);
      nb.horizontal.push_back(pair.a);
    } else {
      na.vertical.push_back(pair.b);
      nb.vertical.push_back(pair.a);
    }
  }
  for (auto& node : graph.nodes) {
    for (auto* list : {&node.horizontal, &node.vertical}) {
      std::sort(list->begin(), list->end());
      list->erase(std::unique(list->begin(), list->end()), list->end());
    }
  }
  return graph;
}

std::vector<int> first_row(const RelationGraph& graph) {
  if (graph.nodes.empty()) throw std::invalid_argument("first_row on an empty graph");
  const auto index = index_by_id(graph);
  std::vector<bool> assigned(graph.nodes.size(), false);
  return peel_group(graph, index, assigned, true);
}

StructureResult recover_structure(const RelationGraph& graph) {
  const auto index = index_by_id(graph);
  StructureResult result;
  result.rows = extract_groups(graph, index, true);
  result.columns = extract_groups(graph, index, false);
  return result;
}

StructureResult recover_structure(const Table& table, const std::vector<LabeledPair>& pairs) {
  return recover_structure(build_relation_graph(table, pairs));
}

StructureResult recover_structure(const Table& table) {
  std::vector<LabeledPair> pairs;
  pairs.reserve(table.relations.size());
  for (const auto& [key, label] : table.relations)
    pairs.push_back(LabeledPair{key.first, key.second, label});
  return recover_structure(table, pairs);
}

StructureMatch structure_match(const StructureResult& truth, const StructureResult& predicted) {
  if (universe(truth) != universe(predicted))
    throw std::invalid_argument("structures cover different cell universes");
  StructureMatch match;
  match.row_score = group_score(truth.rows, predicted.rows);
  match.column_score = group_score(truth.columns, predicted.columns);
  match.overall = (match.row_score + match.column_score) / 2.0;
  auto sorted = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  match.exact = truth.rows == predicted.rows && truth.columns == predicted.columns &&
                sorted(truth.unassigned) == sorted(predicted.unassigned);
  return match;
}

std::string StructureResult::to_json() const {
  json doc{{"rows", rows}, {"columns", columns}, {"unassigned", unassigned}};
  return doc.dump(2) + "\n";
}

StructureResult StructureResult::from_json(const std::string& text) {
  json doc = json::parse(text);
  StructureResult result;
  result.rows = doc.at("rows").get<std::vector<std::vector<int>>>();
  result.columns = doc.at("columns").get<std::vector<std::vector<int>>>();
  result.unassigned = doc.at("unassigned").get<std::vector<int>>();
  return result;
}

}  // namespace tsr
