#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "agvpick/options.hpp"
#include "agvpick/rng.hpp"
#include "agvpick/value_net.hpp"

namespace agvpick {

constexpr int kFeatureDim = 12;

/// Constants that map raw state quantities into [0, 1].
struct FeatureScales {
  double max_x = 1.0;
  double max_y = 1.0;
  double delay_minutes = 15.0;
  double horizon_epochs = 288.0;
  double peak_orders = 1.0;

  static FeatureScales from(const GridMap& map, const ArrivalModel& model, double peak_mean);
  std::vector<double> to_vector() const;
};

/// Aggregate pre-decision descriptors shared by every worker of an epoch.
struct FleetContext {
  double idle_fraction = 0.0;
  double mean_agv_battery = 1.0;
  double time_fraction = 0.0;
  double open_load = 0.0;
};

FleetContext fleet_context(const SystemState& state, const FeatureScales& scales);

/// Post-decision descriptor of one worker:
///   0 x, 1 y, 2 AGV flag, 3 battery, 4 load, 5 minutes to plan end / delay,
///   6 charging flag, 7 idle fraction, 8 mean AGV battery, 9 t / T,
///   10 open orders / peak, 11 battery projected to the next epoch.
Eigen::VectorXd featurize(const Worker& post, const FleetContext& context, const FeatureScales& scales,
                          const GridMap& map, const FleetParams& params, int now_s);

/// Feature columns of every action of every worker.
std::vector<Eigen::MatrixXd> option_features(const std::vector<WorkerOptions>& options, const FleetContext& context,
                                             const FeatureScales& scales, const GridMap& map,
                                             const FleetParams& params, int now_s);

/// reward + discount * net score of each action's post-decision state.
ActionValues coefficients(const ValueNet& net, const std::vector<WorkerOptions>& options,
                          const std::vector<Eigen::MatrixXd>& features, double discount = 1.0);

using FeatureRow = std::array<float, kFeatureDim>;

/// Compact record of one worker's decision context.
struct ExperienceWorker {
  FeatureRow previous{};             // post-decision features chosen one epoch earlier
  std::vector<float> rewards;        // per action id
  std::vector<float> features;       // action_count x kFeatureDim, row-major
  std::vector<std::uint16_t> batch_orders;  // concatenated order indices
  std::vector<std::uint8_t> batch_sizes;
  bool has_charge = false;

  int batch_count() const { return static_cast<int>(batch_sizes.size()); }
  int action_count() const { return batch_count() + 1 + (has_charge ? 1 : 0); }
};

struct Experience {
  int epoch = 0;
  bool terminal = false;  // end of day: targets are zero
  int order_count = 0;
  std::vector<ExperienceWorker> workers;
};

/// Builds an experience from the menu actually offered this epoch.
Experience make_experience(int epoch, const std::vector<FeatureRow>& previous, const MenuInstance& menu,
                           const std::vector<WorkerOptions>& options, const std::vector<Eigen::MatrixXd>& features);
Experience terminal_experience(int epoch, const std::vector<FeatureRow>& previous);

FeatureRow to_row(const Eigen::VectorXd& v);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void add(Experience e);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Uniform sample with replacement.
  std::vector<const Experience*> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Experience> items_;
};

struct TrainTargets {
  Eigen::MatrixXd inputs;   // kFeatureDim x samples
  Eigen::VectorXd targets;  // in value units
};

/// Supervised pairs for a replay sample: each worker's previous features
/// against reward + discount * target score of the action the allocation
/// picks under target-network coefficients.
TrainTargets build_targets(const ValueNet& target, std::span<const Experience* const> sample, double discount);

struct TrainStepResult {
  double loss = 0.0;
  double mean_target = 0.0;
};

TrainStepResult train_step(ValueNet& net, const ValueNet& target, Adam& optimizer,
                           std::span<const Experience* const> sample, double discount);

struct LearnerConfig {
  NetArchitecture architecture;
  double learning_rate = 1e-3;
  std::size_t replay_capacity = 50000;
  std::size_t batch_size = 32;
  std::size_t warmup = 1000;
  double tau = 0.001;
  double discount = 0.9;
  double value_scale = 1000.0;
  std::uint64_t seed = 1;
};

/// Online network, target copy, optimiser and replay memory.
class Learner {
 public:
  explicit Learner(const LearnerConfig& config);

  const ValueNet& net() const { return net_; }
  ValueNet& net() { return net_; }
  const ValueNet& target() const { return target_; }
  const LearnerConfig& config() const { return config_; }
  const ReplayBuffer& replay() const { return replay_; }

  void remember(Experience e) { replay_.add(std::move(e)); }
  /// One replay update plus a soft target sync once warm-up is complete.
  std::optional<TrainStepResult> update();

 private:
  LearnerConfig config_;
  ValueNet net_;
  ValueNet target_;
  Adam adam_;
  ReplayBuffer replay_;
  Rng rng_;
};

}  // namespace agvpick
