#include "agvpick/policies.hpp"

#include <algorithm>
#include <stdexcept>

namespace agvpick {

PolicySpec PolicySpec::parse(const std::string& text) {
  if (text == "myopic-ilp") return myopic_ilp();
  if (text == "neuradp") return neuradp();
  if (text.rfind("neuradp:", 0) == 0) return neuradp(text.substr(8));
  for (const char* prefix : {"myopic-hf-", "myopic-rf-"}) {
    const std::string p(prefix);
    if (text.rfind(p, 0) != 0) continue;
    const std::string digits = text.substr(p.size());
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
      break;
    const int threshold = std::stoi(digits);
    if (threshold > 100) break;
    return heuristic(p == "myopic-hf-", threshold);
  }
  throw std::invalid_argument("unknown policy '" + text + "'");
}

std::string PolicySpec::name() const {
  switch (kind) {
    case Kind::NeurAdp:
      return "neuradp";
    case Kind::MyopicIlp:
      return "myopic-ilp";
    case Kind::MyopicHeuristic:
      return std::string(humans_first ? "myopic-hf-" : "myopic-rf-") + std::to_string(charge_threshold);
  }
  return "?";
}

namespace {

std::vector<int> solve_choices(const std::vector<WorkerOptions>& options, const SystemState& state,
                               const ActionValues& values, int cap, std::optional<MenuInstance>* keep) {
  MenuInstance menu = make_instance(options, static_cast<int>(state.open_orders.size()), values, cap);
  auto choices = menu.to_choices(solve(menu.instance), options);
  if (keep) *keep = std::move(menu);
  return choices;
}

std::vector<int> greedy_choices(const PolicySpec& policy, const SystemState& state,
                                const std::vector<WorkerOptions>& options) {
  std::vector<std::size_t> order;
  for (bool preferred : {true, false})
    for (std::size_t w = 0; w < options.size(); ++w)
      if ((options[w].is_agv != policy.humans_first) == preferred) order.push_back(w);

  std::vector<char> claimed(state.open_orders.size(), 0);
  std::vector<int> choices(options.size(), -1);
  for (std::size_t w : order) {
    const auto& opts = options[w];
    int best = -1;
    for (int b = 0; b < opts.batch_count(); ++b) {
      const auto& cand = opts.batches[static_cast<std::size_t>(b)];
      if (std::any_of(cand.orders.begin(), cand.orders.end(),
                      [&](int o) { return claimed[static_cast<std::size_t>(o)] != 0; }))
        continue;
      if (best < 0) {
        best = b;
        continue;
      }
      const auto& cur = opts.batches[static_cast<std::size_t>(best)];
      if (cand.reward != cur.reward) {
        if (cand.reward > cur.reward) best = b;
      } else if (cand.orders.size() != cur.orders.size()) {
        if (cand.orders.size() < cur.orders.size()) best = b;
      } else if (cand.action.order_ids < cur.action.order_ids) {
        best = b;
      }
    }
    if (best >= 0) {
      for (int o : opts.batches[static_cast<std::size_t>(best)].orders) claimed[static_cast<std::size_t>(o)] = 1;
      choices[w] = best;
    }
  }

  for (std::size_t w = 0; w < options.size(); ++w) {
    if (choices[w] >= 0) continue;
    const auto& opts = options[w];
    const bool low = state.workers[w].battery < policy.charge_threshold;
    choices[w] = opts.charge && low ? opts.charge_action() : opts.null_action();
  }
  return choices;
}

}  // namespace

Decision decide(const PolicySpec& policy, const SystemState& state, const std::vector<WorkerOptions>& options,
                const DecisionContext& context) {
  if (options.size() != state.workers.size()) throw std::invalid_argument("decide: options do not match the fleet");
  Decision d;
  switch (policy.kind) {
    case PolicySpec::Kind::NeurAdp: {
      if (!context.net) throw std::invalid_argument("decide: NeurADP needs a value network");
      if (!context.map || !context.params) throw std::invalid_argument("decide: NeurADP needs map and parameters");
      const auto fleet = fleet_context(state, context.scales);
      d.features = option_features(options, fleet, context.scales, *context.map, *context.params,
                                   epoch_start_s(state.epoch, *context.params));
      const auto values = coefficients(*context.net, options, d.features, context.discount);
      d.choices = solve_choices(options, state, values, context.candidate_cap, &d.menu);
      break;
    }
    case PolicySpec::Kind::MyopicIlp: {
      d.choices = solve_choices(options, state, immediate_rewards(options), context.candidate_cap, nullptr);
      // Opportunity charging: idle AGVs top up instead of waiting.
      for (std::size_t w = 0; w < options.size(); ++w) {
        const auto& opts = options[w];
        if (d.choices[w] == opts.null_action() && opts.charge && state.workers[w].battery < 100.0)
          d.choices[w] = opts.charge_action();
      }
      break;
    }
    case PolicySpec::Kind::MyopicHeuristic:
      d.choices = greedy_choices(policy, state, options);
      break;
  }
  return d;
}

}  // namespace agvpick
