#include "agvpick/neuradp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agvpick {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

FeatureScales FeatureScales::from(const GridMap& map, const ArrivalModel& model, double peak_mean) {
  FeatureScales s;
  s.max_x = std::max(1, map.max_x());
  s.max_y = std::max(1, map.max_y());
  s.delay_minutes = model.delay_minutes;
  s.horizon_epochs = model.horizon_epochs;
  s.peak_orders = peak_mean + 3.0;
  return s;
}

std::vector<double> FeatureScales::to_vector() const {
  return {max_x, max_y, delay_minutes, horizon_epochs, peak_orders};
}

FleetContext fleet_context(const SystemState& state, const FeatureScales& scales) {
  FleetContext c;
  int idle = 0;
  int agvs = 0;
  double battery = 0.0;
  for (const auto& w : state.workers) {
    if (w.idle()) ++idle;
    if (w.is_agv()) {
      ++agvs;
      battery += w.battery;
    }
  }
  if (!state.workers.empty()) c.idle_fraction = static_cast<double>(idle) / static_cast<double>(state.workers.size());
  if (agvs > 0) c.mean_agv_battery = battery / agvs / 100.0;
  c.time_fraction = clamp01(state.epoch / scales.horizon_epochs);
  c.open_load = clamp01(static_cast<double>(state.open_orders.size()) / scales.peak_orders);
  return c;
}

Eigen::VectorXd featurize(const Worker& post, const FleetContext& context, const FeatureScales& scales,
                          const GridMap& map, const FleetParams& params, int now_s) {
  Eigen::VectorXd f(kFeatureDim);
  const Point p = map.position(post.anchor());
  f[0] = p.x / scales.max_x;
  f[1] = p.y / scales.max_y;
  f[2] = post.is_agv() ? 1.0 : 0.0;
  f[3] = post.battery / 100.0;
  f[4] = static_cast<double>(post.load()) / std::max(1, post.max_capacity);
  f[5] = clamp01((plan_completion_s(post, map, now_s) - now_s) / 60.0 / scales.delay_minutes);
  f[6] = post.charging ? 1.0 : 0.0;
  f[7] = context.idle_fraction;
  f[8] = context.mean_agv_battery;
  f[9] = context.time_fraction;
  f[10] = context.open_load;

  double projected = post.battery;
  if (post.is_agv()) {
    try {
      SystemState one{now_s / params.interval_seconds, {post}, {}};
      projected = advance(one, params.interval_seconds, map, params).state.workers.front().battery;
    } catch (const SimulationFault&) {
      projected = 0.0;
    }
  }
  f[11] = clamp01(projected / 100.0);
  return f;
}

std::vector<Eigen::MatrixXd> option_features(const std::vector<WorkerOptions>& options, const FleetContext& context,
                                             const FeatureScales& scales, const GridMap& map,
                                             const FleetParams& params, int now_s) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(options.size());
  for (const auto& o : options) {
    Eigen::MatrixXd m(kFeatureDim, o.action_count());
    for (int a = 0; a < o.action_count(); ++a) m.col(a) = featurize(o.option(a).post, context, scales, map, params, now_s);
    out.push_back(std::move(m));
  }
  return out;
}

ActionValues coefficients(const ValueNet& net, const std::vector<WorkerOptions>& options,
                          const std::vector<Eigen::MatrixXd>& features, double discount) {
  if (features.size() != options.size()) throw std::invalid_argument("coefficients: feature count mismatch");
  Eigen::Index total = 0;
  for (const auto& m : features) total += m.cols();
  Eigen::MatrixXd all(kFeatureDim, total);
  Eigen::Index at = 0;
  for (const auto& m : features) {
    all.middleCols(at, m.cols()) = m;
    at += m.cols();
  }
  const Eigen::VectorXd scores = total > 0 ? net.score_batch(all) : Eigen::VectorXd();

  ActionValues values;
  values.reserve(options.size());
  at = 0;
  for (const auto& o : options) {
    std::vector<double> v(static_cast<std::size_t>(o.action_count()));
    for (int a = 0; a < o.action_count(); ++a) v[static_cast<std::size_t>(a)] = o.option(a).reward + discount * scores[at++];
    values.push_back(std::move(v));
  }
  return values;
}

FeatureRow to_row(const Eigen::VectorXd& v) {
  FeatureRow r{};
  for (int i = 0; i < kFeatureDim; ++i) r[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
  return r;
}

Experience make_experience(int epoch, const std::vector<FeatureRow>& previous, const MenuInstance& menu,
                           const std::vector<WorkerOptions>& options, const std::vector<Eigen::MatrixXd>& features) {
  if (previous.size() != options.size() || menu.batch_map.size() != options.size())
    throw std::invalid_argument("make_experience: worker count mismatch");
  Experience e;
  e.epoch = epoch;
  e.order_count = menu.instance.order_count;
  e.workers.reserve(options.size());
  for (std::size_t w = 0; w < options.size(); ++w) {
    const auto& o = options[w];
    ExperienceWorker x;
    x.previous = previous[w];
    x.has_charge = o.charge.has_value();
    std::vector<int> actions = menu.batch_map[w];
    for (int b : menu.batch_map[w]) {
      const auto& orders = o.batches[static_cast<std::size_t>(b)].orders;
      x.batch_sizes.push_back(static_cast<std::uint8_t>(orders.size()));
      for (int idx : orders) x.batch_orders.push_back(static_cast<std::uint16_t>(idx));
    }
    actions.push_back(o.null_action());
    if (o.charge) actions.push_back(o.charge_action());
    x.rewards.reserve(actions.size());
    x.features.reserve(actions.size() * kFeatureDim);
    for (int a : actions) {
      x.rewards.push_back(static_cast<float>(o.option(a).reward));
      for (int i = 0; i < kFeatureDim; ++i) x.features.push_back(static_cast<float>(features[w](i, a)));
    }
    e.workers.push_back(std::move(x));
  }
  return e;
}

Experience terminal_experience(int epoch, const std::vector<FeatureRow>& previous) {
  Experience e;
  e.epoch = epoch;
  e.terminal = true;
  for (const auto& p : previous) {
    ExperienceWorker x;
    x.previous = p;
    e.workers.push_back(std::move(x));
  }
  return e;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay buffer: capacity must be positive");
}

void ReplayBuffer::add(Experience e) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(e));
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.empty()) throw std::logic_error("replay buffer: sampling from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Experience*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[pick(rng)]);
  return out;
}

TrainTargets build_targets(const ValueNet& target, std::span<const Experience* const> sample, double discount) {
  std::size_t rows = 0;
  for (const auto* e : sample) rows += e->workers.size();
  TrainTargets out;
  out.inputs.resize(kFeatureDim, static_cast<Eigen::Index>(rows));
  out.targets.resize(static_cast<Eigen::Index>(rows));

  Eigen::Index row = 0;
  for (const auto* e : sample) {
    Eigen::Index actions = 0;
    for (const auto& w : e->workers) actions += w.action_count();

    Eigen::VectorXd scores;
    if (!e->terminal && actions > 0) {
      Eigen::MatrixXd all(kFeatureDim, actions);
      Eigen::Index col = 0;
      for (const auto& w : e->workers)
        for (int a = 0; a < w.action_count(); ++a, ++col)
          for (int i = 0; i < kFeatureDim; ++i)
            all(i, col) = w.features[static_cast<std::size_t>(a * kFeatureDim + i)];
      scores = target.score_batch(all);
    }

    std::vector<int> chosen(e->workers.size(), 0);
    std::vector<std::vector<double>> values(e->workers.size());
    if (!e->terminal) {
      AllocationInstance inst;
      inst.order_count = e->order_count;
      Eigen::Index col = 0;
      for (std::size_t w = 0; w < e->workers.size(); ++w) {
        const auto& x = e->workers[w];
        auto& v = values[w];
        for (int a = 0; a < x.action_count(); ++a, ++col)
          v.push_back(x.rewards[static_cast<std::size_t>(a)] + discount * scores[col]);
        WorkerMenu m;
        m.worker_id = static_cast<int>(w);
        m.is_agv = x.has_charge;
        std::size_t at = 0;
        for (int b = 0; b < x.batch_count(); ++b) {
          const std::size_t size = x.batch_sizes[static_cast<std::size_t>(b)];
          m.batches.emplace_back(x.batch_orders.begin() + static_cast<std::ptrdiff_t>(at),
                                 x.batch_orders.begin() + static_cast<std::ptrdiff_t>(at + size));
          m.batch_coefficients.push_back(v[static_cast<std::size_t>(b)]);
          at += size;
        }
        m.null_coefficient = v[static_cast<std::size_t>(x.batch_count())];
        if (x.has_charge) m.charge_coefficient = v[static_cast<std::size_t>(x.batch_count() + 1)];
        inst.workers.push_back(std::move(m));
      }
      chosen = solve(inst).actions;
    }

    for (std::size_t w = 0; w < e->workers.size(); ++w, ++row) {
      const auto& x = e->workers[w];
      for (int i = 0; i < kFeatureDim; ++i) out.inputs(i, row) = x.previous[static_cast<std::size_t>(i)];
      out.targets[row] = e->terminal ? 0.0 : values[w][static_cast<std::size_t>(chosen[w])];
    }
  }
  return out;
}

TrainStepResult train_step(ValueNet& net, const ValueNet& target, Adam& optimizer,
                           std::span<const Experience* const> sample, double discount) {
  const TrainTargets tt = build_targets(target, sample, discount);
  Eigen::VectorXd grad;
  TrainStepResult result;
  result.loss = net.loss_and_gradient(tt.inputs, tt.targets, &grad);
  result.mean_target = tt.targets.size() > 0 ? tt.targets.mean() : 0.0;
  if (!std::isfinite(result.loss) || !grad.allFinite()) return result;
  optimizer.step(net.parameters(), grad);
  return result;
}

Learner::Learner(const LearnerConfig& config)
    : config_(config),
      net_(ValueNet::random(config.architecture, derive_seed(config.seed, 1), config.value_scale)),
      target_(net_),
      adam_(net_.parameter_count(), config.learning_rate),
      replay_(config.replay_capacity),
      rng_(derive_seed(config.seed, 2)) {
  if (config_.batch_size == 0) throw std::invalid_argument("learner: batch_size must be positive");
}

std::optional<TrainStepResult> Learner::update() {
  if (replay_.size() < std::max(config_.warmup, config_.batch_size)) return std::nullopt;
  const auto sample = replay_.sample(config_.batch_size, rng_);
  const TrainStepResult r = train_step(net_, target_, adam_, sample, config_.discount);
  target_.soft_update_from(net_, config_.tau);
  return r;
}

}  // namespace agvpick
