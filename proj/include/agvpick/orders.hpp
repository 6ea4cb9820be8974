#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "agvpick/grid.hpp"
#include "agvpick/rng.hpp"

namespace agvpick {

struct Order {
  int id = 0;
  int pickup = 0;  // pick-up location index in [0, pickup_count)
  NodeId pickup_node = 0;
  bool human_only = false;
  int arrival_epoch = 0;
  int arrival_s = 0;   // epoch start in seconds since midnight
  int deadline_s = 0;  // arrival_s + delay
  bool operator==(const Order&) const = default;
};

struct ArrivalModel {
  double daily_volume = 2618.88;
  double beta_alpha = 5.0;
  double beta_beta = 2.0;
  double human_only_prob = 0.0;
  int delay_minutes = 15;
  int horizon_epochs = 288;
  int interval_seconds = 300;
};

/// Orders arriving in each epoch of one day, indexed by epoch.
using DayOrders = std::vector<std::vector<Order>>;

/// Beta-shaped arrival intensity, scaled so the daily expectation of the
/// curve equals `daily_volume`.
class ArrivalCurve {
 public:
  explicit ArrivalCurve(ArrivalModel model);

  const ArrivalModel& model() const { return model_; }
  double calibration() const { return scale_; }
  /// Mean order count at epoch t, 0 <= t <= horizon.
  double epoch_mean(int t) const;
  double peak_mean() const { return peak_; }

  /// One epoch of arrivals. `next_id` is advanced for every order created.
  std::vector<Order> sample_epoch_orders(const GridMap& map, int t, Rng& rng, int& next_id) const;
  /// A full day driven by a single seed; identical seeds give identical days.
  DayOrders sample_day(const GridMap& map, std::uint64_t seed) const;

 private:
  double density(double x) const;

  ArrivalModel model_;
  double log_norm_ = 0.0;
  double scale_ = 0.0;
  double peak_ = 0.0;
};

double epoch_mean(const ArrivalModel& model, int t);

/// CSV trace: id,epoch,pickup,human_only,deadline (deadline in seconds).
void write_order_csv(std::ostream& out, const DayOrders& day);
/// Reads a trace written by write_order_csv for one day. Pick-up nodes are
/// resolved against `map`; the model's horizon sizes the result.
DayOrders read_order_csv(std::istream& in, const GridMap& map, const ArrivalModel& model);

std::uint64_t hash_orders(const DayOrders& day);

}  // namespace agvpick
