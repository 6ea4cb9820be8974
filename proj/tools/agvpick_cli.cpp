// agvpick: train, evaluate and sweep dispatch policies for a mixed
// human/AGV picking fleet.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "agvpick/config.hpp"
#include "agvpick/simulation.hpp"

namespace fs = std::filesystem;
using namespace agvpick;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, sep))
    if (!cell.empty()) out.push_back(cell);
  return out;
}

SimConfig config_from(const std::string& path) { return path.empty() ? SimConfig{} : load_config(path); }

std::vector<PolicyEntry> policies_from(const std::string& text) {
  std::vector<PolicyEntry> out;
  for (const auto& p : split(text, ',')) out.push_back(make_policy(PolicySpec::parse(p)));
  if (out.empty()) throw ConfigError("no policy given");
  return out;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_evaluation(const Evaluation& e, const fs::path& dir, const std::string& stem) {
  auto table = open_out(dir / (stem + ".csv"));
  write_table_csv(table, e);
  auto days = open_out(dir / (stem + "_days.json"));
  write_days_json(days, e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-picking dispatch for mixed human/AGV fleets"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string policy;
  std::string log_path;
  int days = -1;
  int threads = 0;
  std::uint64_t seed = 0;
  bool quiet = false;

  auto* train_cmd = app.add_subcommand("train", "Train a NeurADP value network");
  train_cmd->add_option("--config", config_path, "Config file");
  train_cmd->add_option("--out", out, "Checkpoint path")->required();
  train_cmd->add_option("--log", log_path, "Training log CSV (default: <out>.log.csv)");
  train_cmd->add_option("--days", days, "Override training days");
  train_cmd->add_flag("--quiet", quiet, "No per-day progress");

  auto* eval_cmd = app.add_subcommand("evaluate", "Compare policies on common test days");
  eval_cmd->add_option("--config", config_path, "Config file");
  eval_cmd->add_option("--policy", policy, "Comma-separated policies")->required();
  eval_cmd->add_option("--days", days, "Test days (default from config)");
  eval_cmd->add_option("--out", out, "Output directory for CSV/JSON");
  eval_cmd->add_option("--threads", threads, "Worker threads");

  std::string dimension;
  std::string values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate policies across one parameter");
  sweep_cmd->add_option("--config", config_path, "Config file");
  sweep_cmd->add_option("--dim", dimension, "worker_mix | speed | delay | capacity | availability")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values (defaults per dimension)");
  sweep_cmd->add_option("--policy", policy, "Comma-separated policies")->required();
  sweep_cmd->add_option("--days", days, "Test days per value (default from config)");
  sweep_cmd->add_option("--out", out, "Output directory for CSV/JSON");
  sweep_cmd->add_option("--threads", threads, "Worker threads");

  auto* gen_cmd = app.add_subcommand("gen-orders", "Write sampled order traces as CSV");
  gen_cmd->add_option("--config", config_path, "Config file");
  int gen_days = 1;
  gen_cmd->add_option("--days", gen_days, "Number of days");
  gen_cmd->add_option("--seed", seed, "Base seed (default: test-day seeds)");
  gen_cmd->add_option("--out", out, "Trace path; day index is appended when days > 1")->required();

  std::string trace_path;
  std::string jsonl_path;
  auto* replay_cmd = app.add_subcommand("replay", "Run one policy on a recorded order trace");
  replay_cmd->add_option("--config", config_path, "Config file");
  replay_cmd->add_option("--trace", trace_path, "Order trace CSV")->required();
  replay_cmd->add_option("--policy", policy, "Policy")->required();
  replay_cmd->add_option("--jsonl", jsonl_path, "Write per-epoch JSON lines here");

  CLI11_PARSE(app, argc, argv);

  try {
    SimConfig config = config_from(config_path);

    if (*train_cmd) {
      if (days >= 0) config.training.days = days;
      validate(config);
      std::ofstream log = open_out(log_path.empty() ? out + ".log.csv" : log_path);
      TrainOptions opts;
      opts.checkpoint_path = out;
      opts.log = &log;
      opts.progress = quiet ? nullptr : &std::cerr;
      try {
        train(config, opts);
      } catch (const TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << " (last good checkpoint kept at " << out << ")\n";
        return kExitInvariant;
      }
      std::cout << "checkpoint written to " << out << "\n";
      return 0;
    }

    if (*eval_cmd) {
      const int n = days > 0 ? days : config.evaluation.days;
      const Evaluation e = evaluate(config, policies_from(policy), n, threads);
      write_table_text(std::cout, e);
      if (!out.empty()) write_evaluation(e, out, "evaluation");
      return 0;
    }

    if (*sweep_cmd) {
      std::vector<std::string> points = split(values, ',');
      if (points.empty()) {
        if (dimension == "worker_mix") points = {"10+0", "5+5", "0+10"};
        else if (dimension == "speed") points = {"30", "45", "60"};
        else if (dimension == "delay") points = {"10", "15", "20"};
        else if (dimension == "capacity") points = {"2", "3"};
        else if (dimension == "availability") points = {"0", "20", "40"};
        else throw ConfigError("sweep: unknown dimension '" + dimension + "'");
      }
      const int n = days > 0 ? days : config.evaluation.days;
      const SweepResult r = sweep(config, dimension, points, policies_from(policy), n, threads);
      for (std::size_t i = 0; i < r.values.size(); ++i) {
        std::cout << "== " << dimension << " = " << r.values[i] << "\n";
        write_table_text(std::cout, r.tables[i]);
        if (!out.empty()) write_evaluation(r.tables[i], out, dimension + "_" + r.values[i]);
      }
      return 0;
    }

    if (*gen_cmd) {
      const Simulator sim(config);
      for (int d = 0; d < gen_days; ++d) {
        const std::uint64_t s = seed != 0 ? derive_seed(seed, static_cast<std::uint64_t>(d)) : test_day_seed(config, d);
        fs::path path(out);
        if (gen_days > 1) path.replace_filename(path.stem().string() + "_" + std::to_string(d) + path.extension().string());
        auto file = open_out(path);
        write_order_csv(file, sim.sample_orders(s));
      }
      return 0;
    }

    if (*replay_cmd) {
      const Simulator sim(config);
      std::ifstream in(trace_path);
      if (!in) throw ConfigError("cannot open " + trace_path);
      const DayOrders orders = read_order_csv(in, sim.map(), config.arrivals);
      const PolicyEntry entry = make_policy(PolicySpec::parse(policy));
      std::ofstream jsonl;
      DayHooks hooks;
      if (!jsonl_path.empty()) {
        jsonl = open_out(jsonl_path);
        hooks.trace = &jsonl;
      }
      const DayStats s = sim.run_day(entry.spec, orders, entry.net.get(), hooks);
      std::cout << "policy " << entry.spec.name() << ": seen " << s.orders_seen << ", filled " << s.orders_filled
                << " (" << 100.0 * s.fill_rate() << "%), mean delivery " << s.delivery_mean_min
                << " min, mean AGV battery " << s.mean_agv_battery << "%\n";
      return 0;
    }
  } catch (const SimulationFault& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CheckpointError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
