#pragma once

#include <optional>
#include <string>
#include <vector>

namespace agvpick {

/// Action menu of one worker. Batches reference orders by index into the
/// instance's order universe.
struct WorkerMenu {
  int worker_id = 0;
  bool is_agv = false;
  std::vector<std::vector<int>> batches;
  std::vector<double> batch_coefficients;
  double null_coefficient = 0.0;
  std::optional<double> charge_coefficient;  // AGVs only

  int batch_count() const { return static_cast<int>(batches.size()); }
  /// Action ids: batches are 0..k-1, Null is k, Charge is k+1.
  int null_action() const { return batch_count(); }
  int charge_action() const { return batch_count() + 1; }
  int action_count() const { return batch_count() + 1 + (charge_coefficient ? 1 : 0); }
  double coefficient(int action) const;
};

struct AllocationInstance {
  int order_count = 0;
  std::vector<WorkerMenu> workers;
};

struct AllocationSolution {
  std::vector<int> actions;  // one action id per worker
  double objective = 0.0;
};

/// Throws std::invalid_argument when a menu is malformed: non-finite
/// coefficients, a human with a Charge entry, empty or duplicate batches, or
/// order indices outside the universe.
void validate(const AllocationInstance& instance);

/// Whether `solution` picks one valid action per worker, uses each order at
/// most once and reports the matching objective.
bool satisfies_constraints(const AllocationInstance& instance, const AllocationSolution& solution);

/// Exact maximiser by depth-first branch-and-bound over workers in index
/// order. Among equal-objective optima the first found is kept; the search is
/// deterministic for a given instance.
AllocationSolution solve(const AllocationInstance& instance);

/// Exhaustive enumeration of every action combination. Throws
/// std::length_error above `max_combinations`.
AllocationSolution brute_force_solve(const AllocationInstance& instance, double max_combinations = 1e6);

/// Indices of the `cap` largest coefficients (ties to the lower index),
/// returned in ascending index order. cap <= 0 keeps everything.
std::vector<int> top_candidates(const std::vector<double>& coefficients, int cap);

std::string to_json(const AllocationInstance& instance);
AllocationInstance instance_from_json(const std::string& text);

}  // namespace agvpick
