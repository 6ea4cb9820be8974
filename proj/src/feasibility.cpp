#include "agvpick/feasibility.hpp"

#include <algorithm>
#include <limits>

namespace agvpick {

namespace {

constexpr double kBatteryTolerance = 1e-9;

bool by_id(const Order& a, const Order& b) { return a.id < b.id; }

}  // namespace

std::optional<Route> optimal_route(const Worker& worker, std::span<const Order> extra, const GridMap& map,
                                   int now_s) {
  Route route;
  route.start_s = now_s;
  route.end_node = worker.anchor();
  if (worker.carried.empty() && worker.pending.empty() && extra.empty()) {
    route.completion_s = now_s;
    return route;
  }

  int deadline = std::numeric_limits<int>::max();
  for (const auto& o : worker.carried) deadline = std::min(deadline, o.deadline_s);
  std::vector<Order> pickups;
  pickups.reserve(worker.pending.size() + extra.size());
  for (const auto& o : worker.pending) pickups.push_back(o);
  for (const auto& o : extra) pickups.push_back(o);
  for (const auto& o : pickups) deadline = std::min(deadline, o.deadline_s);
  std::sort(pickups.begin(), pickups.end(), by_id);

  const WorkerClass kind = worker.kind;
  const NodeId start = worker.anchor();
  const int t0 = now_s + worker.anchor_delay();
  int best = std::numeric_limits<int>::max();
  std::vector<Order> best_order;
  do {
    int t = t0;
    NodeId at = start;
    for (const auto& o : pickups) {
      t += map.travel_time(at, o.pickup_node, kind);
      at = o.pickup_node;
    }
    t += map.travel_time(at, map.drop_off(), kind);
    if (t < best) {
      best = t;
      best_order = pickups;
    }
  } while (std::next_permutation(pickups.begin(), pickups.end(), by_id));

  if (best > deadline) return std::nullopt;
  route.pickups = std::move(best_order);
  route.completion_s = best;
  route.end_node = map.drop_off();
  route.delivers = true;
  return route;
}

double battery_required(const Worker& worker, const Route& route, const GridMap& map, const FleetParams& params) {
  const auto leg = map.nearest_charger(route.end_node, worker.kind);
  const double minutes = (route.duration_s() + leg.seconds) / 60.0;
  return minutes * params.drain_percent_per_min;
}

std::optional<Route> feasible_route(const Worker& worker, std::span<const Order> batch, const GridMap& map,
                                    int now_s, const FleetParams& params) {
  if (worker.load() + static_cast<int>(batch.size()) > worker.max_capacity) return std::nullopt;
  if (worker.is_agv() && std::any_of(batch.begin(), batch.end(), [](const Order& o) { return o.human_only; }))
    return std::nullopt;
  auto route = optimal_route(worker, batch, map, now_s);
  if (!route) return std::nullopt;
  if (worker.is_agv()) {
    const double need = battery_required(worker, *route, map, params) + params.idle_reserve_percent();
    if (worker.battery + kBatteryTolerance < need) return std::nullopt;
  }
  return route;
}

bool is_feasible(const Worker& worker, std::span<const Order> batch, const GridMap& map, int now_s,
                 const FleetParams& params) {
  return feasible_route(worker, batch, map, now_s, params).has_value();
}

FeasibleBatchSet matching_feasibility(const Worker& worker, std::span<const Order> open_orders,
                                      const GridMap& map, int now_s, const FleetParams& params, int batch_cap) {
  FeasibleBatchSet result;
  result.worker_id = worker.id;
  batch_cap = std::min(batch_cap, worker.remaining_capacity());
  if (batch_cap <= 0 || open_orders.empty()) return result;

  const int n = static_cast<int>(open_orders.size());
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i)
    if (!(worker.is_agv() && open_orders[static_cast<std::size_t>(i)].human_only)) candidates.push_back(i);

  // Depth-first extension of feasible subsets by higher-indexed candidates.
  std::vector<int> indices;
  std::vector<Order> batch;
  const auto extend = [&](auto&& self, std::size_t from) -> void {
    for (std::size_t c = from; c < candidates.size(); ++c) {
      const int idx = candidates[c];
      indices.push_back(idx);
      batch.push_back(open_orders[static_cast<std::size_t>(idx)]);
      if (auto route = feasible_route(worker, batch, map, now_s, params)) {
        result.batches.push_back({indices, std::move(*route)});
        if (static_cast<int>(indices.size()) < batch_cap) self(self, c + 1);
      }
      indices.pop_back();
      batch.pop_back();
    }
  };
  extend(extend, 0);

  std::stable_sort(result.batches.begin(), result.batches.end(), [](const FeasibleBatch& a, const FeasibleBatch& b) {
    if (a.orders.size() != b.orders.size()) return a.orders.size() < b.orders.size();
    return a.orders < b.orders;
  });
  return result;
}

}  // namespace agvpick
