#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "agvpick/grid.hpp"
#include "agvpick/orders.hpp"

namespace agvpick {

/// An action that violates capacity, deadline, battery or exclusivity rules.
class InvalidAction : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A broken simulation invariant (e.g. an AGV running flat).
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FleetParams {
  int interval_seconds = 300;
  int horizon_epochs = 288;
  int delay_minutes = 15;
  double drain_percent_per_min = 0.5;
  double charge_percent_per_min = 5.0;
  // Reward per fulfilled order (beta), in minutes.
  double reward_per_order = 30.0;

  /// Battery an idle AGV burns over one decision interval.
  double idle_reserve_percent() const { return drain_percent_per_min * interval_seconds / 60.0; }
};

struct Transit {
  NodeId to = -1;
  int remaining_s = 0;
  bool operator==(const Transit&) const = default;
};

struct Worker {
  int id = 0;
  WorkerClass kind = WorkerClass::Human;
  NodeId node = 0;
  std::optional<Transit> transit;
  int max_capacity = 2;
  double battery = 100.0;
  std::vector<Order> pending;  // pick-ups still to visit, in route order
  std::vector<Order> carried;
  bool charging = false;  // committed to a charger leg / charging session
  NodeId charger = -1;

  bool is_agv() const { return kind == WorkerClass::Agv; }
  int load() const { return static_cast<int>(pending.size() + carried.size()); }
  int remaining_capacity() const { return max_capacity - load(); }
  bool has_orders() const { return !pending.empty() || !carried.empty(); }
  bool idle() const { return !has_orders() && !charging; }
  /// Node the worker plans from: the far end of its current edge, if moving.
  NodeId anchor() const { return transit ? transit->to : node; }
  int anchor_delay() const { return transit ? transit->remaining_s : 0; }

  bool operator==(const Worker&) const = default;
};

struct WorkerAction {
  enum class Kind { Null, Charge, Assign };
  Kind kind = Kind::Null;
  std::vector<int> order_ids;  // Assign only

  static WorkerAction null() { return {}; }
  static WorkerAction charge() { return {Kind::Charge, {}}; }
  static WorkerAction assign(std::vector<int> ids) { return {Kind::Assign, std::move(ids)}; }
  bool operator==(const WorkerAction&) const = default;
};

struct Completion {
  int order_id = 0;
  int worker_id = 0;
  WorkerClass kind = WorkerClass::Human;
  int arrival_s = 0;
  int deadline_s = 0;
  int completed_s = 0;
};

struct SystemState {
  int epoch = 0;
  std::vector<Worker> workers;
  std::vector<Order> open_orders;
};

struct PostDecisionState {
  int epoch = 0;
  std::vector<Worker> workers;
};

struct AdvanceResult {
  SystemState state;
  std::vector<Completion> completions;
};

inline int epoch_start_s(int epoch, const FleetParams& p) { return epoch * p.interval_seconds; }

/// Workers positioned at the drop-off with full batteries; humans get ids
/// [0, n_humans), AGVs follow.
std::vector<Worker> make_fleet(const GridMap& map, int n_humans, int n_agvs, int human_capacity,
                               int agv_capacity);

/// beta * |batch| minus the minutes from now until the re-optimised plan
/// reaches the drop-off. Throws InvalidAction for an infeasible batch.
double immediate_reward(const Worker& worker, std::span<const Order> batch, const GridMap& map,
                        const FleetParams& params, int now_s);

/// Second at which the worker's current commitment ends: its drop-off for an
/// order plan, its charger arrival for a charge leg, otherwise now.
int plan_completion_s(const Worker& worker, const GridMap& map, int now_s);

/// Whether an idle AGV can sit out one more interval and still reach a
/// charger. Busy workers and humans are always safe.
bool can_idle_safely(const Worker& worker, const GridMap& map, const FleetParams& params);

/// Post-decision state of a single worker. Null on an AGV that cannot idle
/// safely becomes a charger leg.
Worker apply_action(const Worker& worker, const WorkerAction& action, std::span<const Order> open_orders,
                    const GridMap& map, const FleetParams& params, int now_s);

/// Moves every worker forward `seconds` along its plan.
AdvanceResult advance(const SystemState& state, int seconds, const GridMap& map, const FleetParams& params);

PostDecisionState statepost(const SystemState& state, std::span<const WorkerAction> actions, const GridMap& map,
                            const FleetParams& params);

/// Advances one interval and installs the next epoch's arrivals.
AdvanceResult statenext(const PostDecisionState& post, std::vector<Order> new_orders, const GridMap& map,
                        const FleetParams& params);

}  // namespace agvpick
