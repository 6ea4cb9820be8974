#include "agvpick/fleet.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "agvpick/feasibility.hpp"

namespace agvpick {

namespace {

constexpr double kEmptyBattery = 1e-9;

double percent_for(int seconds, double rate_per_min) { return rate_per_min * seconds / 60.0; }

void advance_worker(Worker& w, int start_s, int seconds, const GridMap& map, const FleetParams& params,
                    std::vector<Completion>& completions) {
  int t = start_s;
  const int end = start_s + seconds;

  const auto drain = [&](int s) {
    if (!w.is_agv() || s <= 0) return;
    w.battery -= percent_for(s, params.drain_percent_per_min);
    if (w.battery < kEmptyBattery)
      throw SimulationFault("worker " + std::to_string(w.id) + ": battery depleted at node " +
                            std::to_string(w.node) + ", t=" + std::to_string(t + s) + "s");
  };
  const auto settle = [&] {
    while (!w.pending.empty() && w.pending.front().pickup_node == w.node) {
      w.carried.push_back(w.pending.front());
      w.pending.erase(w.pending.begin());
    }
    if (w.pending.empty() && !w.carried.empty() && w.node == map.drop_off()) {
      for (const auto& o : w.carried) {
        if (t > o.deadline_s)
          throw SimulationFault("order " + std::to_string(o.id) + " delivered after its deadline");
        completions.push_back({o.id, w.id, w.kind, o.arrival_s, o.deadline_s, t});
      }
      w.carried.clear();
    }
  };

  while (true) {
    if (w.transit) {
      const int step = std::min(end - t, w.transit->remaining_s);
      drain(step);
      t += step;
      w.transit->remaining_s -= step;
      if (w.transit->remaining_s > 0) break;
      w.node = w.transit->to;
      w.transit.reset();
    }
    settle();
    if (t >= end) break;

    NodeId target = -1;
    if (!w.pending.empty())
      target = w.pending.front().pickup_node;
    else if (!w.carried.empty())
      target = map.drop_off();
    else if (w.charging && w.node != w.charger)
      target = w.charger;
    if (target >= 0) {
      w.transit = Transit{map.next_hop(w.node, target), map.edge_seconds(w.kind)};
      continue;
    }
    if (w.charging && w.is_agv())
      w.battery = std::min(100.0, w.battery + percent_for(end - t, params.charge_percent_per_min));
    else
      drain(end - t);
    t = end;
  }

  // A charging session lasts until the next decision epoch.
  if (w.charging && !w.transit && w.node == w.charger) {
    w.charging = false;
    w.charger = -1;
  }
}

const Order& find_open_order(std::span<const Order> open_orders, int id) {
  for (const auto& o : open_orders)
    if (o.id == id) return o;
  throw InvalidAction("order " + std::to_string(id) + " is not open");
}

}  // namespace

std::vector<Worker> make_fleet(const GridMap& map, int n_humans, int n_agvs, int human_capacity, int agv_capacity) {
  if (n_humans < 0 || n_agvs < 0) throw std::invalid_argument("fleet: worker counts must be >= 0");
  if ((n_humans > 0 && human_capacity < 1) || (n_agvs > 0 && agv_capacity < 1))
    throw std::invalid_argument("fleet: capacities must be >= 1");
  std::vector<Worker> fleet;
  for (int i = 0; i < n_humans + n_agvs; ++i) {
    Worker w;
    w.id = i;
    w.kind = i < n_humans ? WorkerClass::Human : WorkerClass::Agv;
    w.node = map.drop_off();
    w.max_capacity = i < n_humans ? human_capacity : agv_capacity;
    fleet.push_back(w);
  }
  return fleet;
}

double immediate_reward(const Worker& worker, std::span<const Order> batch, const GridMap& map,
                        const FleetParams& params, int now_s) {
  if (batch.empty()) return 0.0;
  const auto route = feasible_route(worker, batch, map, now_s, params);
  if (!route) throw InvalidAction("batch is infeasible for worker " + std::to_string(worker.id));
  return params.reward_per_order * static_cast<double>(batch.size()) - route->duration_s() / 60.0;
}

int plan_completion_s(const Worker& worker, const GridMap& map, int now_s) {
  int t = now_s + worker.anchor_delay();
  NodeId at = worker.anchor();
  if (worker.has_orders()) {
    for (const auto& o : worker.pending) {
      t += map.travel_time(at, o.pickup_node, worker.kind);
      at = o.pickup_node;
    }
    return t + map.travel_time(at, map.drop_off(), worker.kind);
  }
  if (worker.charging) return t + map.travel_time(at, worker.charger, worker.kind);
  return worker.transit ? t : now_s;
}

bool can_idle_safely(const Worker& worker, const GridMap& map, const FleetParams& params) {
  if (!worker.is_agv() || !worker.idle()) return true;
  const auto leg = map.nearest_charger(worker.anchor(), worker.kind);
  const double need = percent_for(worker.anchor_delay() + leg.seconds, params.drain_percent_per_min);
  return worker.battery - params.idle_reserve_percent() - need > kEmptyBattery;
}

namespace {

Worker send_to_charger(Worker w, const GridMap& map) {
  w.charging = true;
  w.charger = map.nearest_charger(w.anchor(), w.kind).charger;
  return w;
}

}  // namespace

Worker apply_action(const Worker& worker, const WorkerAction& action, std::span<const Order> open_orders,
                    const GridMap& map, const FleetParams& params, int now_s) {
  switch (action.kind) {
    case WorkerAction::Kind::Null:
      if (!can_idle_safely(worker, map, params)) return send_to_charger(worker, map);
      return worker;
    case WorkerAction::Kind::Charge:
      if (!worker.is_agv()) throw InvalidAction("only AGVs can charge");
      if (worker.has_orders()) throw InvalidAction("AGV " + std::to_string(worker.id) + " is serving orders");
      return send_to_charger(worker, map);
    case WorkerAction::Kind::Assign: {
      if (action.order_ids.empty()) throw InvalidAction("empty batch");
      std::vector<Order> batch;
      for (int id : action.order_ids) batch.push_back(find_open_order(open_orders, id));
      auto route = feasible_route(worker, batch, map, now_s, params);
      if (!route) throw InvalidAction("batch is infeasible for worker " + std::to_string(worker.id));
      Worker w = worker;
      w.pending = std::move(route->pickups);
      w.charging = false;
      w.charger = -1;
      return w;
    }
  }
  return worker;
}

AdvanceResult advance(const SystemState& state, int seconds, const GridMap& map, const FleetParams& params) {
  if (seconds < 0) throw std::invalid_argument("advance: negative duration");
  AdvanceResult result{state, {}};
  const int start = epoch_start_s(state.epoch, params);
  for (auto& w : result.state.workers) advance_worker(w, start, seconds, map, params, result.completions);
  return result;
}

PostDecisionState statepost(const SystemState& state, std::span<const WorkerAction> actions, const GridMap& map,
                            const FleetParams& params) {
  if (actions.size() != state.workers.size())
    throw InvalidAction("statepost: expected one action per worker");
  std::unordered_set<int> taken;
  for (const auto& a : actions)
    for (int id : a.order_ids)
      if (!taken.insert(id).second) throw InvalidAction("order " + std::to_string(id) + " assigned twice");

  PostDecisionState post;
  post.epoch = state.epoch;
  post.workers.reserve(state.workers.size());
  const int now = epoch_start_s(state.epoch, params);
  for (std::size_t i = 0; i < actions.size(); ++i)
    post.workers.push_back(apply_action(state.workers[i], actions[i], state.open_orders, map, params, now));
  return post;
}

AdvanceResult statenext(const PostDecisionState& post, std::vector<Order> new_orders, const GridMap& map,
                        const FleetParams& params) {
  SystemState current{post.epoch, post.workers, {}};
  AdvanceResult result = advance(current, params.interval_seconds, map, params);
  result.state.epoch = post.epoch + 1;
  for (const auto& o : new_orders)
    if (o.arrival_epoch != result.state.epoch)
      throw std::invalid_argument("statenext: order " + std::to_string(o.id) + " belongs to another epoch");
  result.state.open_orders = std::move(new_orders);
  return result;
}

}  // namespace agvpick
