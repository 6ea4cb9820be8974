#pragma once

#include <optional>
#include <span>
#include <vector>

#include "agvpick/fleet.hpp"

namespace agvpick {

/// A re-planned itinerary: pick-ups in visiting order, then the drop-off.
struct Route {
  std::vector<Order> pickups;
  int start_s = 0;
  int completion_s = 0;
  NodeId end_node = 0;
  bool delivers = false;  // false for the empty route

  int duration_s() const { return completion_s - start_s; }
};

/// Fastest pick-up ordering for the worker's pending pick-ups plus `extra`,
/// followed by the drop-off, that meets every carried/pending/extra deadline.
/// Equal-time orderings resolve to the lexicographically smallest order-id
/// sequence.
std::optional<Route> optimal_route(const Worker& worker, std::span<const Order> extra, const GridMap& map,
                                   int now_s);

/// Percent needed to drive the route and then reach the charger nearest to
/// the route's end.
double battery_required(const Worker& worker, const Route& route, const GridMap& map, const FleetParams& params);

/// The route for worker + batch when the batch passes capacity, order-class,
/// deadline and battery checks. AGVs must also keep one idle interval of
/// charge on top of battery_required.
std::optional<Route> feasible_route(const Worker& worker, std::span<const Order> batch, const GridMap& map,
                                    int now_s, const FleetParams& params);

bool is_feasible(const Worker& worker, std::span<const Order> batch, const GridMap& map, int now_s,
                 const FleetParams& params);

struct FeasibleBatch {
  std::vector<int> orders;  // indices into the open-order list, ascending
  Route route;
};

struct FeasibleBatchSet {
  int worker_id = 0;
  std::vector<FeasibleBatch> batches;  // by size, then lexicographic indices
};

/// Every nonempty subset of `open_orders` of size <= batch_cap the worker can
/// take on. Supersets are only explored from feasible subsets, which is exact
/// because feasibility is closed under taking subsets.
FeasibleBatchSet matching_feasibility(const Worker& worker, std::span<const Order> open_orders,
                                      const GridMap& map, int now_s, const FleetParams& params, int batch_cap);

inline FeasibleBatchSet matching_feasibility(const Worker& worker, std::span<const Order> open_orders,
                                             const GridMap& map, int now_s, const FleetParams& params) {
  return matching_feasibility(worker, open_orders, map, now_s, params, worker.remaining_capacity());
}

}  // namespace agvpick
