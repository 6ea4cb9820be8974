#include "agvpick/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace agvpick {

double SimConfig::beta() const {
  if (reward_per_order > 0.0) return reward_per_order;
  int cap = std::max(fleet.n_humans > 0 ? fleet.human_capacity : 0, fleet.n_agvs > 0 ? fleet.agv_capacity : 0);
  if (cap == 0) cap = std::max(fleet.human_capacity, fleet.agv_capacity);
  return static_cast<double>(cap * arrivals.delay_minutes);
}

FleetParams SimConfig::fleet_params() const {
  FleetParams p;
  p.interval_seconds = arrivals.interval_seconds;
  p.horizon_epochs = arrivals.horizon_epochs;
  p.delay_minutes = arrivals.delay_minutes;
  p.drain_percent_per_min = fleet.drain_percent_per_min;
  p.charge_percent_per_min = fleet.charge_percent_per_min;
  p.reward_per_order = beta();
  return p;
}

void validate(const SimConfig& c) {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  require(c.layout.corridors >= 1, "layout.corridors must be >= 1");
  require(c.layout.cells_per_corridor >= 1, "layout.cells_per_corridor must be >= 1");
  require(c.layout.cells_per_node >= 1, "layout.cells_per_node must be >= 1");
  require(c.layout.human_edge_seconds > 0 && c.layout.agv_edge_seconds > 0, "edge seconds must be positive");
  require(c.arrivals.daily_volume >= 0.0, "arrivals.daily_volume must be >= 0");
  require(c.arrivals.beta_alpha > 0.0 && c.arrivals.beta_beta > 0.0, "beta shape parameters must be positive");
  require(c.arrivals.human_only_prob >= 0.0 && c.arrivals.human_only_prob <= 1.0,
          "arrivals.human_only_prob must be in [0, 1]");
  require(c.arrivals.delay_minutes > 0, "arrivals.delay_minutes must be positive");
  require(c.arrivals.interval_seconds > 0 && c.arrivals.horizon_epochs > 0, "horizon and interval must be positive");
  require(c.arrivals.interval_seconds * c.arrivals.horizon_epochs == 86400,
          "horizon_epochs x interval_seconds must cover 86400 s");
  require(c.fleet.n_humans >= 0 && c.fleet.n_agvs >= 0, "worker counts must be >= 0");
  require(c.fleet.human_capacity >= 1 && c.fleet.agv_capacity >= 1, "capacities must be >= 1");
  require(c.fleet.human_capacity <= 4 && c.fleet.agv_capacity <= 4, "capacities above 4 are not supported");
  require(c.fleet.drain_percent_per_min > 0.0 && c.fleet.charge_percent_per_min > 0.0, "battery rates must be > 0");
  require(c.reward_per_order >= 0.0, "reward.reward_per_order must be >= 0");
  require(c.beta() > c.arrivals.delay_minutes, "reward per order must exceed the delay in minutes");
  require(c.candidate_cap >= 0, "candidate_cap must be >= 0");
  require(c.training.days >= 0 && c.training.checkpoint_every >= 0, "training days must be >= 0");
  const auto& l = c.training.learner;
  require(l.learning_rate > 0.0, "training.learning_rate must be positive");
  require(l.replay_capacity > 0 && l.batch_size > 0, "replay capacity and batch size must be positive");
  require(l.tau > 0.0 && l.tau <= 1.0, "training.tau must be in (0, 1]");
  require(l.discount > 0.0 && l.discount <= 1.0, "training.discount must be in (0, 1]");
  require(l.value_scale > 0.0, "training.value_scale must be positive");
  require(!l.architecture.hidden.empty(), "training.hidden must list at least one layer");
  for (int h : l.architecture.hidden) require(h >= 1, "training.hidden sizes must be >= 1");
  require(c.evaluation.days >= 1, "evaluation.days must be >= 1");
  require(c.evaluation.threads >= 0, "evaluation.threads must be >= 0");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T v{};
  in >> v;
  if (!in || !in.eof()) throw ConfigError("config: bad value '" + value + "' for " + key);
  return v;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::istringstream in(value);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(parse_number<int>(key, trim(cell)));
  return out;
}

using Setter = std::function<void(SimConfig&, const std::string& key, const std::string& value)>;

template <typename T, typename Field>
Setter number(Field field) {
  return [field](SimConfig& c, const std::string& k, const std::string& v) { field(c) = parse_number<T>(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"layout.corridors", number<int>([](SimConfig& c) -> int& { return c.layout.corridors; })},
      {"layout.cells_per_corridor", number<int>([](SimConfig& c) -> int& { return c.layout.cells_per_corridor; })},
      {"layout.cells_per_node", number<int>([](SimConfig& c) -> int& { return c.layout.cells_per_node; })},
      {"layout.human_edge_seconds", number<int>([](SimConfig& c) -> int& { return c.layout.human_edge_seconds; })},
      {"layout.agv_edge_seconds", number<int>([](SimConfig& c) -> int& { return c.layout.agv_edge_seconds; })},
      {"arrivals.daily_volume", number<double>([](SimConfig& c) -> double& { return c.arrivals.daily_volume; })},
      {"arrivals.beta_alpha", number<double>([](SimConfig& c) -> double& { return c.arrivals.beta_alpha; })},
      {"arrivals.beta_beta", number<double>([](SimConfig& c) -> double& { return c.arrivals.beta_beta; })},
      {"arrivals.human_only_prob",
       number<double>([](SimConfig& c) -> double& { return c.arrivals.human_only_prob; })},
      {"arrivals.delay_minutes", number<int>([](SimConfig& c) -> int& { return c.arrivals.delay_minutes; })},
      {"arrivals.horizon_epochs", number<int>([](SimConfig& c) -> int& { return c.arrivals.horizon_epochs; })},
      {"arrivals.interval_seconds", number<int>([](SimConfig& c) -> int& { return c.arrivals.interval_seconds; })},
      {"arrivals.seed", number<std::uint64_t>([](SimConfig& c) -> std::uint64_t& { return c.seed; })},
      {"fleet.n_humans", number<int>([](SimConfig& c) -> int& { return c.fleet.n_humans; })},
      {"fleet.n_agvs", number<int>([](SimConfig& c) -> int& { return c.fleet.n_agvs; })},
      {"fleet.human_capacity", number<int>([](SimConfig& c) -> int& { return c.fleet.human_capacity; })},
      {"fleet.agv_capacity", number<int>([](SimConfig& c) -> int& { return c.fleet.agv_capacity; })},
      {"fleet.drain_percent_per_min",
       number<double>([](SimConfig& c) -> double& { return c.fleet.drain_percent_per_min; })},
      {"fleet.charge_percent_per_min",
       number<double>([](SimConfig& c) -> double& { return c.fleet.charge_percent_per_min; })},
      {"fleet.candidate_cap", number<int>([](SimConfig& c) -> int& { return c.candidate_cap; })},
      {"reward.reward_per_order", number<double>([](SimConfig& c) -> double& { return c.reward_per_order; })},
      {"training.days", number<int>([](SimConfig& c) -> int& { return c.training.days; })},
      {"training.checkpoint_every", number<int>([](SimConfig& c) -> int& { return c.training.checkpoint_every; })},
      {"training.learning_rate",
       number<double>([](SimConfig& c) -> double& { return c.training.learner.learning_rate; })},
      {"training.replay_capacity",
       number<std::size_t>([](SimConfig& c) -> std::size_t& { return c.training.learner.replay_capacity; })},
      {"training.batch_size",
       number<std::size_t>([](SimConfig& c) -> std::size_t& { return c.training.learner.batch_size; })},
      {"training.warmup", number<std::size_t>([](SimConfig& c) -> std::size_t& { return c.training.learner.warmup; })},
      {"training.tau", number<double>([](SimConfig& c) -> double& { return c.training.learner.tau; })},
      {"training.discount", number<double>([](SimConfig& c) -> double& { return c.training.learner.discount; })},
      {"training.value_scale",
       number<double>([](SimConfig& c) -> double& { return c.training.learner.value_scale; })},
      {"training.seed", number<std::uint64_t>([](SimConfig& c) -> std::uint64_t& { return c.training.learner.seed; })},
      {"training.hidden",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.training.learner.architecture.hidden = parse_int_list(k, v);
       }},
      {"evaluation.days", number<int>([](SimConfig& c) -> int& { return c.evaluation.days; })},
      {"evaluation.seed", number<std::uint64_t>([](SimConfig& c) -> std::uint64_t& { return c.evaluation.seed; })},
      {"evaluation.threads", number<int>([](SimConfig& c) -> int& { return c.evaluation.threads; })},
  };
  return table;
}

}  // namespace

SimConfig parse_config(std::istream& in) {
  SimConfig config;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key " + key);
    it->second(config, key, value);
  }
  validate(config);
  return config;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in);
}

void write_config(std::ostream& out, const SimConfig& c) {
  const auto& l = c.training.learner;
  std::string hidden;
  for (std::size_t i = 0; i < l.architecture.hidden.size(); ++i)
    hidden += (i ? "," : "") + std::to_string(l.architecture.hidden[i]);
  out.precision(17);
  out << "[layout]\n"
      << "corridors = " << c.layout.corridors << "\n"
      << "cells_per_corridor = " << c.layout.cells_per_corridor << "\n"
      << "cells_per_node = " << c.layout.cells_per_node << "\n"
      << "human_edge_seconds = " << c.layout.human_edge_seconds << "\n"
      << "agv_edge_seconds = " << c.layout.agv_edge_seconds << "\n\n"
      << "[arrivals]\n"
      << "daily_volume = " << c.arrivals.daily_volume << "\n"
      << "beta_alpha = " << c.arrivals.beta_alpha << "\n"
      << "beta_beta = " << c.arrivals.beta_beta << "\n"
      << "human_only_prob = " << c.arrivals.human_only_prob << "\n"
      << "delay_minutes = " << c.arrivals.delay_minutes << "\n"
      << "horizon_epochs = " << c.arrivals.horizon_epochs << "\n"
      << "interval_seconds = " << c.arrivals.interval_seconds << "\n"
      << "seed = " << c.seed << "\n\n"
      << "[fleet]\n"
      << "n_humans = " << c.fleet.n_humans << "\n"
      << "n_agvs = " << c.fleet.n_agvs << "\n"
      << "human_capacity = " << c.fleet.human_capacity << "\n"
      << "agv_capacity = " << c.fleet.agv_capacity << "\n"
      << "drain_percent_per_min = " << c.fleet.drain_percent_per_min << "\n"
      << "charge_percent_per_min = " << c.fleet.charge_percent_per_min << "\n"
      << "candidate_cap = " << c.candidate_cap << "\n\n"
      << "[reward]\n"
      << "reward_per_order = " << c.reward_per_order << "\n\n"
      << "[training]\n"
      << "days = " << c.training.days << "\n"
      << "checkpoint_every = " << c.training.checkpoint_every << "\n"
      << "hidden = " << hidden << "\n"
      << "learning_rate = " << l.learning_rate << "\n"
      << "replay_capacity = " << l.replay_capacity << "\n"
      << "batch_size = " << l.batch_size << "\n"
      << "warmup = " << l.warmup << "\n"
      << "tau = " << l.tau << "\n"
      << "discount = " << l.discount << "\n"
      << "value_scale = " << l.value_scale << "\n"
      << "seed = " << l.seed << "\n\n"
      << "[evaluation]\n"
      << "days = " << c.evaluation.days << "\n"
      << "seed = " << c.evaluation.seed << "\n"
      << "threads = " << c.evaluation.threads << "\n";
}

}  // namespace agvpick
