#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "agvpick/fleet.hpp"
#include "agvpick/grid.hpp"
#include "agvpick/neuradp.hpp"
#include "agvpick/orders.hpp"

namespace agvpick {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FleetSpec {
  int n_humans = 5;
  int n_agvs = 5;
  int human_capacity = 2;
  int agv_capacity = 2;
  double drain_percent_per_min = 0.5;
  double charge_percent_per_min = 5.0;
};

struct TrainingConfig {
  int days = 200;
  int checkpoint_every = 10;  // days; 0 writes only the final checkpoint
  LearnerConfig learner;
};

struct EvaluationConfig {
  int days = 50;
  std::uint64_t seed = 7919;
  int threads = 0;  // 0 = hardware concurrency
};

struct SimConfig {
  LayoutConfig layout;
  ArrivalModel arrivals;
  FleetSpec fleet;
  double reward_per_order = 0.0;  // 0 = max capacity x delay minutes
  int candidate_cap = 100;
  std::uint64_t seed = 1;  // training order stream
  TrainingConfig training;
  EvaluationConfig evaluation;

  /// Effective beta.
  double beta() const;
  FleetParams fleet_params() const;
};

/// Throws ConfigError on out-of-range values.
void validate(const SimConfig& config);

/// INI-style text: `[section]` headers and `key = value` lines, `#` or `;`
/// comments. Sections: layout, arrivals, fleet, reward, training, evaluation.
SimConfig parse_config(std::istream& in);
SimConfig load_config(const std::string& path);
void write_config(std::ostream& out, const SimConfig& config);

}  // namespace agvpick
