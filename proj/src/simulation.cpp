#include "agvpick/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace agvpick {

namespace {

class Fnv {
 public:
  void feed(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xffU;
      h_ *= 0x100000001b3ULL;
    }
  }
  void feed(double v) { feed(std::bit_cast<std::uint64_t>(v)); }
  void feed(int v) { feed(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

double percentile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

int in_flight(const std::vector<Worker>& workers) {
  int n = 0;
  for (const auto& w : workers) n += w.load();
  return n;
}

void check_workers(const std::vector<Worker>& workers, int epoch, DayStats& stats) {
  for (const auto& w : workers) {
    stats.max_load_excess = std::max(stats.max_load_excess, w.load() - w.max_capacity);
    if (w.load() > w.max_capacity)
      throw SimulationFault("epoch " + std::to_string(epoch) + ": worker " + std::to_string(w.id) +
                            " exceeds its capacity");
    if (w.is_agv()) {
      stats.min_agv_battery = std::min(stats.min_agv_battery, w.battery);
      if (!(w.battery > 0.0 && w.battery <= 100.0))
        throw SimulationFault("epoch " + std::to_string(epoch) + ": AGV " + std::to_string(w.id) +
                              " battery out of range");
      if (w.charging && w.has_orders())
        throw SimulationFault("epoch " + std::to_string(epoch) + ": AGV " + std::to_string(w.id) +
                              " charging while serving orders");
    } else if (w.battery != 100.0) {
      throw SimulationFault("epoch " + std::to_string(epoch) + ": human battery changed");
    }
  }
}

nlohmann::json worker_json(const Worker& w) {
  nlohmann::json j{{"id", w.id},           {"node", w.node},         {"battery", w.battery},
                   {"load", w.load()},     {"charging", w.charging}, {"pending", nlohmann::json::array()},
                   {"carried", nlohmann::json::array()}};
  if (w.transit) j["transit"] = {{"to", w.transit->to}, {"remaining_s", w.transit->remaining_s}};
  for (const auto& o : w.pending) j["pending"].push_back(o.id);
  for (const auto& o : w.carried) j["carried"].push_back(o.id);
  return j;
}

nlohmann::json action_json(const WorkerAction& a) {
  switch (a.kind) {
    case WorkerAction::Kind::Null:
      return "null";
    case WorkerAction::Kind::Charge:
      return "charge";
    case WorkerAction::Kind::Assign:
      return nlohmann::json{{"assign", a.order_ids}};
  }
  return nullptr;
}

}  // namespace

Simulator::Simulator(SimConfig config)
    : config_(std::move(config)),
      map_((validate(config_), GridMap::build(config_.layout))),
      curve_(config_.arrivals),
      params_(config_.fleet_params()),
      scales_(FeatureScales::from(map_, config_.arrivals, curve_.peak_mean())) {}

std::vector<Worker> Simulator::initial_fleet() const {
  const auto& f = config_.fleet;
  return make_fleet(map_, f.n_humans, f.n_agvs, f.human_capacity, f.agv_capacity);
}

DayStats Simulator::run_day(const PolicySpec& policy, const DayOrders& orders, const ValueNet* net,
                            const DayHooks& hooks) const {
  const int horizon = params_.horizon_epochs;
  if (static_cast<int>(orders.size()) != horizon) throw std::invalid_argument("run_day: order trace horizon mismatch");

  DayStats stats;
  stats.orders_hash = hash_orders(orders);
  for (const auto& epoch : orders) stats.orders_seen += static_cast<int>(epoch.size());

  Learner* learner = hooks.learner;
  DecisionContext ctx;
  ctx.map = &map_;
  ctx.params = &params_;
  ctx.scales = scales_;
  ctx.candidate_cap = config_.candidate_cap;
  ctx.discount = learner ? learner->config().discount : config_.training.learner.discount;
  ctx.net = learner ? &learner->net() : net;
  if (learner && policy.kind != PolicySpec::Kind::NeurAdp)
    throw std::invalid_argument("run_day: learning requires the NeurADP policy");

  SystemState state{0, initial_fleet(), orders.front()};
  int generated = static_cast<int>(state.open_orders.size());
  int completed = 0;
  std::vector<double> delivery;
  std::vector<FeatureRow> previous(state.workers.size());
  Fnv trajectory;
  double battery_sum = 0.0;
  int battery_samples = 0;
  long charging_sum = 0;

  const auto record = [&](const std::vector<Completion>& done) {
    for (const auto& c : done) {
      ++completed;
      if (c.kind == WorkerClass::Human)
        ++stats.human_filled;
      else
        ++stats.agv_filled;
      if (c.completed_s > c.deadline_s) ++stats.late_deliveries;
      delivery.push_back((c.completed_s - c.arrival_s) / 60.0);
      trajectory.feed(c.order_id);
      trajectory.feed(c.completed_s);
    }
  };
  const auto conserve = [&](const std::vector<Worker>& post_workers, int epoch) {
    ++stats.conservation_checks;
    if (generated != completed + stats.expired_unassigned + in_flight(post_workers))
      throw SimulationFault("epoch " + std::to_string(epoch) + ": order conservation violated");
  };
  const auto trace = [&](int epoch, const std::vector<Worker>& workers, const std::vector<WorkerAction>& actions,
                         const std::vector<Completion>& done) {
    if (!hooks.trace) return;
    nlohmann::json line{{"epoch", epoch}, {"workers", nlohmann::json::array()},
                        {"actions", nlohmann::json::array()}, {"completions", nlohmann::json::array()}};
    for (const auto& w : workers) line["workers"].push_back(worker_json(w));
    for (const auto& a : actions) line["actions"].push_back(action_json(a));
    for (const auto& c : done)
      line["completions"].push_back({{"order", c.order_id}, {"worker", c.worker_id}, {"completed_s", c.completed_s}});
    *hooks.trace << line.dump() << '\n';
  };

  for (int t = 0; t < horizon; ++t) {
    check_workers(state.workers, t, stats);
    for (const auto& w : state.workers)
      if (w.is_agv()) {
        battery_sum += w.battery;
        ++battery_samples;
      }

    const auto options = build_options(state, map_, params_);
    const Decision decision = decide(policy, state, options, ctx);
    if (learner) {
      if (t > 0) learner->remember(make_experience(t, previous, *decision.menu, options, decision.features));
      for (std::size_t w = 0; w < options.size(); ++w)
        previous[w] = to_row(decision.features[w].col(decision.choices[w]));
    }
    const auto actions = to_actions(options, decision.choices);
    const PostDecisionState post = statepost(state, actions, map_, params_);

    int assigned = 0;
    for (const auto& a : actions) assigned += static_cast<int>(a.order_ids.size());
    stats.expired_unassigned += static_cast<int>(state.open_orders.size()) - assigned;
    for (const auto& w : post.workers) charging_sum += (w.is_agv() && w.charging) ? 1 : 0;
    check_workers(post.workers, t, stats);
    conserve(post.workers, t);
    for (std::size_t w = 0; w < decision.choices.size(); ++w) trajectory.feed(decision.choices[w]);

    std::vector<Order> next = t + 1 < horizon ? orders[static_cast<std::size_t>(t + 1)] : std::vector<Order>{};
    generated += static_cast<int>(next.size());
    AdvanceResult adv = statenext(post, std::move(next), map_, params_);
    record(adv.completions);
    trace(t, post.workers, actions, adv.completions);
    state = std::move(adv.state);
    for (const auto& w : state.workers) {
      trajectory.feed(w.node);
      trajectory.feed(w.battery);
    }

    if (learner) {
      if (auto r = learner->update()) {
        if (!std::isfinite(r->loss) || !learner->net().all_finite())
          throw TrainingDiverged("training diverged at epoch " + std::to_string(t));
        if (hooks.updates) hooks.updates->push_back(*r);
      }
    }
  }
  if (learner) learner->remember(terminal_experience(horizon, previous));

  // Let committed plans finish; no new orders arrive.
  const int drain_limit = params_.delay_minutes * 60 / params_.interval_seconds + 2;
  for (int k = 0; k < drain_limit && in_flight(state.workers) > 0; ++k) {
    const std::vector<WorkerAction> idle(state.workers.size());
    const PostDecisionState post = statepost(state, idle, map_, params_);
    check_workers(post.workers, state.epoch, stats);
    conserve(post.workers, state.epoch);
    AdvanceResult adv = statenext(post, {}, map_, params_);
    record(adv.completions);
    trace(state.epoch, post.workers, idle, adv.completions);
    state = std::move(adv.state);
  }
  if (in_flight(state.workers) > 0) throw SimulationFault("orders still in flight after the day ended");
  if (completed + stats.expired_unassigned != generated) throw SimulationFault("end-of-day conservation violated");

  stats.orders_filled = completed;
  std::sort(delivery.begin(), delivery.end());
  if (!delivery.empty()) {
    double sum = 0.0;
    for (double d : delivery) sum += d;
    stats.delivery_mean_min = sum / static_cast<double>(delivery.size());
    stats.delivery_max_min = delivery.back();
  }
  stats.delivery_p50_min = percentile(delivery, 0.5);
  stats.delivery_p90_min = percentile(delivery, 0.9);
  stats.mean_agv_battery = battery_samples > 0 ? battery_sum / battery_samples : 0.0;
  stats.mean_agvs_charging = static_cast<double>(charging_sum) / horizon;
  if (battery_samples == 0) stats.min_agv_battery = 0.0;
  stats.trajectory_hash = trajectory.value();
  return stats;
}

std::uint64_t training_day_seed(const SimConfig& config, int day) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(day));
}

std::uint64_t test_day_seed(const SimConfig& config, int day) {
  // Separate stream family from training days.
  return derive_seed(mix_seed(config.evaluation.seed) ^ 0x7465737464617973ULL, static_cast<std::uint64_t>(day));
}

ValueNet train(const SimConfig& config, const TrainOptions& options) {
  const Simulator sim(config);
  Learner learner(config.training.learner);
  learner.net().set_normalization(sim.scales().to_vector());

  if (options.log) *options.log << "step,day,loss,mean_target\n";
  long step = 0;
  const auto save = [&] {
    if (!options.checkpoint_path.empty()) save_checkpoint(learner.net(), options.checkpoint_path);
  };
  const PolicySpec policy = PolicySpec::neuradp();
  for (int day = 0; day < config.training.days; ++day) {
    std::vector<TrainStepResult> updates;
    DayHooks hooks;
    hooks.learner = &learner;
    hooks.updates = &updates;
    const DayStats stats = sim.run_day(policy, sim.sample_orders(training_day_seed(config, day)), nullptr, hooks);
    if (options.log) {
      for (const auto& u : updates) *options.log << ++step << ',' << day << ',' << u.loss << ',' << u.mean_target << '\n';
      options.log->flush();
    }
    if (options.progress)
      *options.progress << "day " << day + 1 << "/" << config.training.days << ": filled " << stats.orders_filled
                        << "/" << stats.orders_seen << ", updates " << updates.size() << std::endl;
    if (config.training.checkpoint_every > 0 && (day + 1) % config.training.checkpoint_every == 0) save();
  }
  save();
  return learner.net();
}

PolicyEntry make_policy(const PolicySpec& spec) {
  PolicyEntry e{spec, nullptr};
  if (spec.kind == PolicySpec::Kind::NeurAdp) {
    if (spec.checkpoint.empty()) throw std::invalid_argument("neuradp policy needs a checkpoint path");
    e.net = std::make_shared<const ValueNet>(load_checkpoint(spec.checkpoint));
  }
  return e;
}

double Evaluation::mean_filled(std::size_t p) const {
  double s = 0.0;
  for (const auto& d : days[p]) s += d.orders_filled;
  return days[p].empty() ? 0.0 : s / static_cast<double>(days[p].size());
}

double Evaluation::mean_seen(std::size_t p) const {
  double s = 0.0;
  for (const auto& d : days[p]) s += d.orders_seen;
  return days[p].empty() ? 0.0 : s / static_cast<double>(days[p].size());
}

double Evaluation::mean_delivery(std::size_t p) const {
  double s = 0.0;
  double n = 0.0;
  for (const auto& d : days[p]) {
    s += d.delivery_mean_min * d.orders_filled;
    n += d.orders_filled;
  }
  return n > 0.0 ? s / n : 0.0;
}

double Evaluation::percent_increase(std::size_t a, std::size_t b) const {
  double s = 0.0;
  for (std::size_t d = 0; d < days[a].size(); ++d) {
    const auto& x = days[a][d];
    const auto& y = days[b][d];
    if (x.orders_seen > 0) s += 100.0 * (x.orders_filled - y.orders_filled) / x.orders_seen;
  }
  return days[a].empty() ? 0.0 : s / static_cast<double>(days[a].size());
}

bool Evaluation::common_orders() const {
  for (std::size_t p = 1; p < days.size(); ++p)
    for (std::size_t d = 0; d < days[p].size(); ++d)
      if (days[p][d].orders_hash != days[0][d].orders_hash) return false;
  return true;
}

Evaluation evaluate(const SimConfig& config, const std::vector<PolicyEntry>& policies, int n_days, int threads) {
  if (policies.empty()) throw std::invalid_argument("evaluate: no policies given");
  if (n_days < 1) throw std::invalid_argument("evaluate: n_days must be >= 1");
  const Simulator sim(config);
  std::vector<DayOrders> orders;
  orders.reserve(static_cast<std::size_t>(n_days));
  for (int d = 0; d < n_days; ++d) orders.push_back(sim.sample_orders(test_day_seed(config, d)));

  Evaluation e;
  for (const auto& p : policies) {
    e.policies.push_back(p.spec.name());
    e.days.emplace_back(static_cast<std::size_t>(n_days));
  }
  const std::size_t tasks = policies.size() * static_cast<std::size_t>(n_days);
  if (threads <= 0) threads = config.evaluation.threads;
  if (threads <= 0) threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), tasks));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks;) {
      const std::size_t p = i / static_cast<std::size_t>(n_days);
      const std::size_t d = i % static_cast<std::size_t>(n_days);
      try {
        e.days[p][d] = sim.run_day(policies[p].spec, orders[d], policies[p].net.get());
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks;
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return e;
}

namespace {

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

template <typename F>
Summary summarize(const std::vector<DayStats>& days, F field) {
  Summary s;
  if (days.empty()) return s;
  for (const auto& d : days) s.mean += field(d);
  s.mean /= static_cast<double>(days.size());
  if (days.size() > 1) {
    for (const auto& d : days) s.sd += (field(d) - s.mean) * (field(d) - s.mean);
    s.sd = std::sqrt(s.sd / static_cast<double>(days.size() - 1));
  }
  return s;
}

}  // namespace

void write_table_csv(std::ostream& out, const Evaluation& e) {
  out << "policy,days,seen_mean,seen_sd,filled_mean,filled_sd,fill_pct,delivery_mean_min,delivery_p90_min,"
         "human_filled,agv_filled,agv_battery_mean,agvs_charging_mean,expired_mean";
  for (const auto& p : e.policies) out << ",incr_vs_" << p;
  out << '\n';
  out << std::fixed << std::setprecision(4);
  for (std::size_t p = 0; p < e.policies.size(); ++p) {
    const auto& d = e.days[p];
    const auto seen = summarize(d, [](const DayStats& s) { return double(s.orders_seen); });
    const auto filled = summarize(d, [](const DayStats& s) { return double(s.orders_filled); });
    out << e.policies[p] << ',' << d.size() << ',' << seen.mean << ',' << seen.sd << ',' << filled.mean << ','
        << filled.sd << ',' << (seen.mean > 0 ? 100.0 * filled.mean / seen.mean : 0.0) << ',' << e.mean_delivery(p)
        << ',' << summarize(d, [](const DayStats& s) { return s.delivery_p90_min; }).mean << ','
        << summarize(d, [](const DayStats& s) { return double(s.human_filled); }).mean << ','
        << summarize(d, [](const DayStats& s) { return double(s.agv_filled); }).mean << ','
        << summarize(d, [](const DayStats& s) { return s.mean_agv_battery; }).mean << ','
        << summarize(d, [](const DayStats& s) { return s.mean_agvs_charging; }).mean << ','
        << summarize(d, [](const DayStats& s) { return double(s.expired_unassigned); }).mean;
    for (std::size_t q = 0; q < e.policies.size(); ++q) out << ',' << e.percent_increase(p, q);
    out << '\n';
  }
}

void write_table_text(std::ostream& out, const Evaluation& e) {
  out << std::left << std::setw(16) << "policy" << std::right << std::setw(20) << "orders seen" << std::setw(20)
      << "orders filled" << std::setw(9) << "fill %" << std::setw(11) << "delivery";
  for (const auto& p : e.policies) out << ' ' << std::setw(16) << ("vs " + p);
  out << '\n' << std::fixed;
  for (std::size_t p = 0; p < e.policies.size(); ++p) {
    const auto seen = summarize(e.days[p], [](const DayStats& s) { return double(s.orders_seen); });
    const auto filled = summarize(e.days[p], [](const DayStats& s) { return double(s.orders_filled); });
    std::ostringstream a, b;
    a << std::fixed << std::setprecision(2) << seen.mean << " +- " << seen.sd;
    b << std::fixed << std::setprecision(2) << filled.mean << " +- " << filled.sd;
    out << std::left << std::setw(16) << e.policies[p] << std::right << std::setw(20) << a.str() << std::setw(20)
        << b.str() << std::setw(9) << std::setprecision(2) << (seen.mean > 0 ? 100.0 * filled.mean / seen.mean : 0.0)
        << std::setw(11) << e.mean_delivery(p);
    for (std::size_t q = 0; q < e.policies.size(); ++q) out << ' ' << std::setw(16) << e.percent_increase(p, q);
    out << '\n';
  }
}

void write_days_json(std::ostream& out, const Evaluation& e) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t p = 0; p < e.policies.size(); ++p) {
    auto& rows = j[e.policies[p]] = nlohmann::json::array();
    for (const auto& d : e.days[p])
      rows.push_back({{"orders_seen", d.orders_seen},
                      {"orders_filled", d.orders_filled},
                      {"expired_unassigned", d.expired_unassigned},
                      {"late_deliveries", d.late_deliveries},
                      {"delivery_mean_min", d.delivery_mean_min},
                      {"delivery_p50_min", d.delivery_p50_min},
                      {"delivery_p90_min", d.delivery_p90_min},
                      {"human_filled", d.human_filled},
                      {"agv_filled", d.agv_filled},
                      {"mean_agv_battery", d.mean_agv_battery},
                      {"mean_agvs_charging", d.mean_agvs_charging},
                      {"orders_hash", d.orders_hash}});
  }
  out << j.dump(2) << '\n';
}

SimConfig sweep_point(const SimConfig& base, const std::string& dimension, const std::string& value) {
  SimConfig c = base;
  const auto as_int = [&](const std::string& v) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw ConfigError("sweep: bad value '" + v + "' for " + dimension);
    }
  };
  if (dimension == "worker_mix") {
    const auto plus = value.find('+');
    if (plus == std::string::npos) throw ConfigError("sweep: worker_mix values look like H+A, e.g. 5+5");
    c.fleet.n_humans = as_int(value.substr(0, plus));
    c.fleet.n_agvs = as_int(value.substr(plus + 1));
  } else if (dimension == "speed") {
    c.layout.agv_edge_seconds = as_int(value);
  } else if (dimension == "delay") {
    c.arrivals.delay_minutes = as_int(value);
  } else if (dimension == "capacity") {
    c.fleet.human_capacity = c.fleet.agv_capacity = as_int(value);
  } else if (dimension == "availability") {
    c.arrivals.human_only_prob = as_int(value) / 100.0;
  } else {
    throw ConfigError("sweep: unknown dimension '" + dimension + "'");
  }
  validate(c);
  return c;
}

SweepResult sweep(const SimConfig& config, const std::string& dimension, const std::vector<std::string>& values,
                  const std::vector<PolicyEntry>& policies, int n_days, int threads) {
  SweepResult r;
  r.dimension = dimension;
  for (const auto& v : values) {
    const SimConfig point = sweep_point(config, dimension, v);
    r.values.push_back(v);
    r.tables.push_back(evaluate(point, policies, n_days, threads));
  }
  return r;
}

}  // namespace agvpick
