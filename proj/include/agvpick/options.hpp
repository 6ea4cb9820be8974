#pragma once

#include <optional>
#include <vector>

#include "agvpick/allocation.hpp"
#include "agvpick/fleet.hpp"

namespace agvpick {

struct ActionOption {
  WorkerAction action;
  std::vector<int> orders;  // indices into the open-order list
  double reward = 0.0;
  Worker post;
};

/// Everything one worker may do this epoch. Action ids follow the allocation
/// convention: batches 0..k-1, Null k, Charge k+1.
struct WorkerOptions {
  int worker_id = 0;
  bool is_agv = false;
  std::vector<ActionOption> batches;
  ActionOption null;
  std::optional<ActionOption> charge;  // AGVs without orders

  int batch_count() const { return static_cast<int>(batches.size()); }
  int null_action() const { return batch_count(); }
  int charge_action() const { return batch_count() + 1; }
  int action_count() const { return batch_count() + 1 + (charge ? 1 : 0); }
  const ActionOption& option(int action) const;
};

/// Feasible batches, Null and Charge for every worker, with immediate rewards
/// and post-decision worker states.
std::vector<WorkerOptions> build_options(const SystemState& state, const GridMap& map, const FleetParams& params);

/// Per-worker coefficient for each action id.
using ActionValues = std::vector<std::vector<double>>;

ActionValues immediate_rewards(const std::vector<WorkerOptions>& options);

/// Allocation instance over the options, keeping the `candidate_cap` best
/// batches per worker by value (0 keeps all).
struct MenuInstance {
  AllocationInstance instance;
  std::vector<std::vector<int>> batch_map;  // instance batch -> option batch

  /// Option action ids for a solution of `instance`.
  std::vector<int> to_choices(const AllocationSolution& solution, const std::vector<WorkerOptions>& options) const;
};

MenuInstance make_instance(const std::vector<WorkerOptions>& options, int order_count, const ActionValues& values,
                           int candidate_cap);

std::vector<WorkerAction> to_actions(const std::vector<WorkerOptions>& options, const std::vector<int>& choices);

}  // namespace agvpick
