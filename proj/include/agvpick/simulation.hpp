#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "agvpick/config.hpp"
#include "agvpick/policies.hpp"

namespace agvpick {

struct DayStats {
  int orders_seen = 0;
  int orders_filled = 0;
  int expired_unassigned = 0;
  int late_deliveries = 0;  // completed after the deadline
  double delivery_mean_min = 0.0;
  double delivery_p50_min = 0.0;
  double delivery_p90_min = 0.0;
  double delivery_max_min = 0.0;
  int human_filled = 0;
  int agv_filled = 0;
  double mean_agv_battery = 0.0;
  double min_agv_battery = 100.0;
  double mean_agvs_charging = 0.0;
  int max_load_excess = 0;  // largest load - capacity seen; <= 0 when sound
  int conservation_checks = 0;
  std::uint64_t orders_hash = 0;
  std::uint64_t trajectory_hash = 0;

  double fill_rate() const { return orders_seen > 0 ? static_cast<double>(orders_filled) / orders_seen : 0.0; }
  bool operator==(const DayStats&) const = default;
};

/// Optional learning and tracing attachments of a simulated day.
struct DayHooks {
  Learner* learner = nullptr;   // store experiences and update once per epoch
  std::ostream* trace = nullptr;  // JSON lines, one per epoch
  std::vector<TrainStepResult>* updates = nullptr;
};

/// Raised when training produces a non-finite loss or parameters.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Map, arrival curve and parameters built once from a config.
class Simulator {
 public:
  explicit Simulator(SimConfig config);

  const SimConfig& config() const { return config_; }
  const GridMap& map() const { return map_; }
  const ArrivalCurve& arrivals() const { return curve_; }
  const FleetParams& params() const { return params_; }
  const FeatureScales& scales() const { return scales_; }

  DayOrders sample_orders(std::uint64_t seed) const { return curve_.sample_day(map_, seed); }
  std::vector<Worker> initial_fleet() const;

  /// One day from midnight until every committed order is delivered.
  /// Throws SimulationFault on any broken invariant.
  DayStats run_day(const PolicySpec& policy, const DayOrders& orders, const ValueNet* net = nullptr,
                   const DayHooks& hooks = {}) const;
  DayStats run_day(const PolicySpec& policy, std::uint64_t seed, const ValueNet* net = nullptr) const {
    return run_day(policy, sample_orders(seed), net);
  }

 private:
  SimConfig config_;
  GridMap map_;
  ArrivalCurve curve_;
  FleetParams params_;
  FeatureScales scales_;
};

/// Order-stream seed of training day `day` and of test day `day`.
std::uint64_t training_day_seed(const SimConfig& config, int day);
std::uint64_t test_day_seed(const SimConfig& config, int day);

struct TrainOptions {
  std::string checkpoint_path;  // empty: no files written
  std::ostream* log = nullptr;  // CSV: step,day,loss,mean_target
  std::ostream* progress = nullptr;
};

/// Trains a value network for config.training.days days and returns it.
ValueNet train(const SimConfig& config, const TrainOptions& options = {});

struct PolicyEntry {
  PolicySpec spec;
  std::shared_ptr<const ValueNet> net;  // NeurAdp only
};

/// Loads the checkpoint of a NeurAdp spec.
PolicyEntry make_policy(const PolicySpec& spec);

struct Evaluation {
  std::vector<std::string> policies;
  std::vector<std::vector<DayStats>> days;  // [policy][day]

  double mean_filled(std::size_t p) const;
  double mean_seen(std::size_t p) const;
  double mean_delivery(std::size_t p) const;
  /// Mean over days of (filled_a - filled_b) / seen * 100.
  double percent_increase(std::size_t a, std::size_t b) const;
  bool common_orders() const;
};

/// Runs every policy on the same `n_days` test days.
Evaluation evaluate(const SimConfig& config, const std::vector<PolicyEntry>& policies, int n_days, int threads = 0);

void write_table_csv(std::ostream& out, const Evaluation& e);
void write_table_text(std::ostream& out, const Evaluation& e);
void write_days_json(std::ostream& out, const Evaluation& e);

/// Config for one sweep point. Dimensions: worker_mix ("H+A"), speed (AGV
/// edge seconds), delay (minutes), capacity (orders per worker), availability
/// (human-only percent).
SimConfig sweep_point(const SimConfig& base, const std::string& dimension, const std::string& value);

struct SweepResult {
  std::string dimension;
  std::vector<std::string> values;
  std::vector<Evaluation> tables;
};

SweepResult sweep(const SimConfig& config, const std::string& dimension, const std::vector<std::string>& values,
                  const std::vector<PolicyEntry>& policies, int n_days, int threads = 0);

}  // namespace agvpick
