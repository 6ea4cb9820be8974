#include "agvpick/grid.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace agvpick {

namespace {

constexpr int kUnreachable = std::numeric_limits<int>::max();

}  // namespace

GridMap GridMap::build(const LayoutConfig& config) {
  if (config.corridors < 1) throw std::invalid_argument("layout: corridors must be >= 1");
  if (config.cells_per_corridor < 1) throw std::invalid_argument("layout: cells_per_corridor must be >= 1");
  if (config.cells_per_node < 1) throw std::invalid_argument("layout: cells_per_node must be >= 1");
  if (config.human_edge_seconds <= 0 || config.agv_edge_seconds <= 0)
    throw std::invalid_argument("layout: edge seconds must be positive");

  GridMap map;
  map.config_ = config;
  map.rows_ = (config.cells_per_corridor + config.cells_per_node - 1) / config.cells_per_node;

  const int width = config.corridors + 1;
  const int height = map.rows_ + 2;
  map.positions_.reserve(static_cast<std::size_t>(width * height));
  for (int x = 0; x < width; ++x)
    for (int y = 0; y < height; ++y) map.positions_.push_back({x, y});

  const auto id = [height](int x, int y) { return x * height + y; };
  map.adjacency_.assign(map.positions_.size(), {});
  const auto connect = [&](NodeId a, NodeId b) {
    map.edges_.emplace_back(a, b);
    map.adjacency_[static_cast<std::size_t>(a)].push_back(b);
    map.adjacency_[static_cast<std::size_t>(b)].push_back(a);
  };
  for (int x = 0; x < width; ++x)
    for (int y = 0; y + 1 < height; ++y) connect(id(x, y), id(x, y + 1));
  for (int y : {0, height - 1})
    for (int x = 0; x + 1 < width; ++x) connect(id(x, y), id(x + 1, y));
  for (auto& adj : map.adjacency_) std::sort(adj.begin(), adj.end());

  for (int column = 0; column < config.corridors; ++column)
    for (int cell = 0; cell < config.cells_per_corridor; ++cell)
      map.pickup_nodes_.push_back(id(column, 1 + cell / config.cells_per_node));

  map.drop_off_ = id(0, 0);
  map.chargers_ = {id(width - 1, 0), id(0, height - 1)};

  // All-pairs BFS; the next-hop table picks the lowest-id neighbour on a
  // shortest path so that movement is deterministic.
  const std::size_t n = map.positions_.size();
  map.hops_.assign(n * n, kUnreachable);
  for (NodeId src = 0; src < static_cast<NodeId>(n); ++src) {
    std::queue<NodeId> frontier;
    map.hops_[map.index(src, src)] = 0;
    frontier.push(src);
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop();
      for (NodeId v : map.adjacency_[static_cast<std::size_t>(u)]) {
        int& d = map.hops_[map.index(src, v)];
        if (d == kUnreachable) {
          d = map.hops_[map.index(src, u)] + 1;
          frontier.push(v);
        }
      }
    }
  }
  map.next_hop_.assign(n * n, -1);
  for (NodeId from = 0; from < static_cast<NodeId>(n); ++from) {
    for (NodeId to = 0; to < static_cast<NodeId>(n); ++to) {
      if (from == to) {
        map.next_hop_[map.index(from, to)] = to;
        continue;
      }
      const int d = map.hops_[map.index(from, to)];
      if (d == kUnreachable) throw StructuralError("grid: disconnected aisle graph");
      for (NodeId v : map.adjacency_[static_cast<std::size_t>(from)]) {
        if (map.hops_[map.index(v, to)] == d - 1) {
          map.next_hop_[map.index(from, to)] = v;
          break;
        }
      }
    }
  }
  return map;
}

NodeId GridMap::node_at(Point p) const {
  const int height = rows_ + 2;
  if (p.x < 0 || p.x > config_.corridors || p.y < 0 || p.y >= height)
    throw std::out_of_range("grid: point outside the aisle grid");
  return p.x * height + p.y;
}

bool GridMap::is_charger(NodeId n) const {
  return std::find(chargers_.begin(), chargers_.end(), n) != chargers_.end();
}

void GridMap::check_node(NodeId n) const {
  if (!contains(n)) throw std::out_of_range("grid: unknown node " + std::to_string(n));
}

int GridMap::hops(NodeId from, NodeId to) const {
  check_node(from);
  check_node(to);
  const int d = hops_[index(from, to)];
  if (d == kUnreachable) throw StructuralError("grid: unreachable node pair");
  return d;
}

int GridMap::edge_seconds(WorkerClass c) const {
  return c == WorkerClass::Human ? config_.human_edge_seconds : config_.agv_edge_seconds;
}

int GridMap::travel_time(NodeId from, NodeId to, WorkerClass c) const {
  return hops(from, to) * edge_seconds(c);
}

NodeId GridMap::next_hop(NodeId from, NodeId to) const {
  check_node(from);
  check_node(to);
  return next_hop_[index(from, to)];
}

ChargerChoice GridMap::nearest_charger(NodeId from, WorkerClass c) const {
  ChargerChoice best;
  for (NodeId charger : chargers_) {
    const int s = travel_time(from, charger, c);
    if (best.charger < 0 || s < best.seconds || (s == best.seconds && charger < best.charger))
      best = {charger, s};
  }
  return best;
}

}  // namespace agvpick
