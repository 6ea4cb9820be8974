#pragma once

#include <algorithm>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "agvpick/allocation.hpp"
#include "agvpick/fleet.hpp"
#include "agvpick/grid.hpp"

namespace agvpick::testing {

inline const GridMap& default_map() {
  static const GridMap map = build_grid(LayoutConfig{});
  return map;
}

/// Hop counts from `src` by breadth-first search over the raw edge list.
inline std::vector<int> bfs_hops(const GridMap& map, NodeId src) {
  std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(map.node_count()));
  for (const auto& [a, b] : map.edges()) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<int> dist(adj.size(), -1);
  std::queue<NodeId> q;
  dist[static_cast<std::size_t>(src)] = 0;
  q.push(src);
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (NodeId v : adj[static_cast<std::size_t>(u)])
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        q.push(v);
      }
  }
  return dist;
}

inline Order make_order(const GridMap& map, int id, int pickup, int arrival_s, int delay_s,
                        bool human_only = false) {
  Order o;
  o.id = id;
  o.pickup = pickup;
  o.pickup_node = map.pickup_node(pickup);
  o.human_only = human_only;
  o.arrival_epoch = arrival_s / 300;
  o.arrival_s = arrival_s;
  o.deadline_s = arrival_s + delay_s;
  return o;
}

inline Worker make_worker(const GridMap& map, int id, WorkerClass kind, int capacity = 2, double battery = 100.0) {
  Worker w;
  w.id = id;
  w.kind = kind;
  w.node = map.drop_off();
  w.max_capacity = capacity;
  w.battery = battery;
  return w;
}

/// Brute-force fastest deadline-respecting visiting order, independent of
/// the library's route search.
inline std::optional<int> oracle_completion(const GridMap& map, const Worker& w, std::vector<Order> pickups,
                                            int now_s) {
  int deadline = 1 << 30;
  for (const auto& o : w.carried) deadline = std::min(deadline, o.deadline_s);
  for (const auto& o : pickups) deadline = std::min(deadline, o.deadline_s);
  if (pickups.empty() && w.carried.empty()) return now_s;
  std::vector<int> perm(pickups.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  const int edge = map.edge_seconds(w.kind);
  std::optional<int> best;
  do {
    int t = now_s + w.anchor_delay();
    NodeId at = w.anchor();
    for (int i : perm) {
      const NodeId next = pickups[static_cast<std::size_t>(i)].pickup_node;
      t += bfs_hops(map, at)[static_cast<std::size_t>(next)] * edge;
      at = next;
    }
    t += bfs_hops(map, at)[static_cast<std::size_t>(map.drop_off())] * edge;
    if (t <= deadline && (!best || t < *best)) best = t;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Percent an AGV needs for a plan completing at `done` at the drop-off, from
// first principles: drain while driving, the leg to the nearest charger and
// one idle interval.
inline double oracle_need(const GridMap& map, const Worker& w, int now_s, int done) {
  const auto dist = bfs_hops(map, map.drop_off());
  int leg = 1 << 30;
  for (NodeId c : map.chargers()) leg = std::min(leg, dist[static_cast<std::size_t>(c)] * map.edge_seconds(w.kind));
  return (done - now_s + leg) / 60.0 * 0.5 + 300 / 60.0 * 0.5;
}

inline bool oracle_feasible(const GridMap& map, const Worker& w, const std::vector<Order>& batch, int now_s) {
  if (w.load() + static_cast<int>(batch.size()) > w.max_capacity) return false;
  for (const auto& o : batch)
    if (w.is_agv() && o.human_only) return false;
  std::vector<Order> all = w.pending;
  all.insert(all.end(), batch.begin(), batch.end());
  const auto done = oracle_completion(map, w, all, now_s);
  if (!done) return false;
  return !w.is_agv() || w.battery + 1e-9 >= oracle_need(map, w, now_s, *done);
}

/// Every feasible nonempty subset of `open`, by exhaustive enumeration.
inline std::set<std::vector<int>> oracle_feasible_sets(const GridMap& map, const Worker& w,
                                                       const std::vector<Order>& open, int now_s) {
  std::set<std::vector<int>> out;
  const int n = static_cast<int>(open.size());
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> idx;
    std::vector<Order> batch;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        idx.push_back(i);
        batch.push_back(open[static_cast<std::size_t>(i)]);
      }
    if (oracle_feasible(map, w, batch, now_s)) out.insert(idx);
  }
  return out;
}

struct FeasibilityContext {
  Worker worker;
  int now_s = 0;
  std::vector<Order> open;
};

/// Random worker and open-order set; `trial` alternates the worker class.
inline FeasibilityContext random_context(const GridMap& map, std::mt19937& rng, int trial) {
  std::uniform_int_distribution<int> loc(0, map.pickup_count() - 1), node(0, map.node_count() - 1), cap(1, 3),
      count(0, 6);
  std::uniform_real_distribution<double> battery(2.0, 100.0);
  FeasibilityContext c;
  const bool agv = trial % 2 != 0;
  c.worker = make_worker(map, 0, agv ? WorkerClass::Agv : WorkerClass::Human, cap(rng), agv ? battery(rng) : 100.0);
  c.worker.node = node(rng);
  c.now_s = 300 * (trial % 50);
  if (trial % 3 == 0 && c.worker.max_capacity > 1) c.worker.pending.push_back(make_order(map, 100, loc(rng), c.now_s, 900));
  const int n = count(rng);
  for (int i = 0; i < n; ++i)
    c.open.push_back(make_order(map, i, loc(rng), c.now_s, 300 + 60 * (i * 7 % 12), i % 4 == 0));
  return c;
}

/// Random allocation menus with coefficients uniform in [-10, 10].
inline AllocationInstance random_instance(std::mt19937_64& rng, int max_workers, int max_orders, int max_batches,
                                          int max_batch_size) {
  std::uniform_int_distribution<int> workers(1, max_workers), orders(0, max_orders);
  std::uniform_real_distribution<double> coef(-10.0, 10.0);
  AllocationInstance inst;
  inst.order_count = orders(rng);
  const int n = workers(rng);
  for (int w = 0; w < n; ++w) {
    WorkerMenu m;
    m.worker_id = w;
    m.is_agv = rng() % 2 == 0;
    if (inst.order_count > 0) {
      const int k = static_cast<int>(rng() % static_cast<unsigned>(max_batches + 1));
      for (int b = 0; b < k; ++b) {
        std::vector<int> all(static_cast<std::size_t>(inst.order_count));
        for (int i = 0; i < inst.order_count; ++i) all[static_cast<std::size_t>(i)] = i;
        std::shuffle(all.begin(), all.end(), rng);
        const int size = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::min(max_batch_size, inst.order_count)));
        all.resize(static_cast<std::size_t>(size));
        std::sort(all.begin(), all.end());
        m.batches.push_back(all);
        m.batch_coefficients.push_back(coef(rng));
      }
    }
    m.null_coefficient = coef(rng);
    if (m.is_agv && rng() % 2 == 0) m.charge_coefficient = coef(rng);
    inst.workers.push_back(m);
  }
  return inst;
}

}  // namespace agvpick::testing
