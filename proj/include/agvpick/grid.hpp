#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace agvpick {

using NodeId = int;

enum class WorkerClass { Human, Agv };

inline const char* to_string(WorkerClass c) { return c == WorkerClass::Human ? "human" : "agv"; }

/// Thrown when a routing query hits a malformed map (e.g. an unreachable pair).
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct LayoutConfig {
  int corridors = 9;
  int cells_per_corridor = 20;
  // Consecutive shelf cells of one column that share a movement node.
  int cells_per_node = 5;
  int human_edge_seconds = 30;
  int agv_edge_seconds = 30;
};

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

struct ChargerChoice {
  NodeId charger = -1;
  int seconds = 0;
};

/// Grid warehouse graph.
///
/// Shelf column c (0-based) sits between vertical aisles c and c + 1. Aisle
/// nodes exist at every (x, y) with x in [0, corridors] and y in [0, rows + 1];
/// rows 0 and rows + 1 are the bottom and top cross-aisles, the only rows
/// where neighbouring aisles connect. A shelf cell is picked from the node of
/// the aisle on its left. Drop-off is the bottom-left node, chargers are the
/// bottom-right and top-left nodes.
///
/// Immutable after construction; all-pairs hop counts are precomputed.
class GridMap {
 public:
  static GridMap build(const LayoutConfig& config);

  const LayoutConfig& config() const { return config_; }

  int node_count() const { return static_cast<int>(positions_.size()); }
  bool contains(NodeId n) const { return n >= 0 && n < node_count(); }
  Point position(NodeId n) const { return positions_.at(static_cast<std::size_t>(n)); }
  NodeId node_at(Point p) const;
  int max_x() const { return config_.corridors; }
  int max_y() const { return rows_ + 1; }

  int pickup_count() const { return static_cast<int>(pickup_nodes_.size()); }
  NodeId pickup_node(int pickup) const { return pickup_nodes_.at(static_cast<std::size_t>(pickup)); }

  NodeId drop_off() const { return drop_off_; }
  /// Bottom-right charger first, then top-left.
  std::span<const NodeId> chargers() const { return chargers_; }
  bool is_charger(NodeId n) const;

  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
  std::span<const NodeId> neighbors(NodeId n) const { return adjacency_.at(static_cast<std::size_t>(n)); }

  int hops(NodeId from, NodeId to) const;
  int edge_seconds(WorkerClass c) const;
  int travel_time(NodeId from, NodeId to, WorkerClass c) const;
  /// First node after `from` on a deterministic shortest path to `to`.
  NodeId next_hop(NodeId from, NodeId to) const;
  /// Closest charger by travel time, ties to the lower node id.
  ChargerChoice nearest_charger(NodeId from, WorkerClass c) const;

 private:
  GridMap() = default;
  std::size_t index(NodeId a, NodeId b) const {
    return static_cast<std::size_t>(a) * positions_.size() + static_cast<std::size_t>(b);
  }
  void check_node(NodeId n) const;

  LayoutConfig config_;
  int rows_ = 0;
  std::vector<Point> positions_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::vector<NodeId> pickup_nodes_;
  NodeId drop_off_ = 0;
  std::vector<NodeId> chargers_;
  std::vector<int> hops_;
  std::vector<NodeId> next_hop_;
};

inline GridMap build_grid(const LayoutConfig& config) { return GridMap::build(config); }

}  // namespace agvpick
