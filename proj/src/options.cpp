#include "agvpick/options.hpp"

#include <stdexcept>

#include "agvpick/feasibility.hpp"

namespace agvpick {

const ActionOption& WorkerOptions::option(int action) const {
  if (action >= 0 && action < batch_count()) return batches[static_cast<std::size_t>(action)];
  if (action == null_action()) return null;
  if (action == charge_action() && charge) return *charge;
  throw std::out_of_range("options: unknown action id");
}

std::vector<WorkerOptions> build_options(const SystemState& state, const GridMap& map, const FleetParams& params) {
  const int now = epoch_start_s(state.epoch, params);
  std::vector<WorkerOptions> all;
  all.reserve(state.workers.size());
  for (const auto& worker : state.workers) {
    WorkerOptions opts;
    opts.worker_id = worker.id;
    opts.is_agv = worker.is_agv();

    auto feasible = matching_feasibility(worker, state.open_orders, map, now, params);
    opts.batches.reserve(feasible.batches.size());
    for (auto& fb : feasible.batches) {
      ActionOption opt;
      for (int idx : fb.orders) opt.action.order_ids.push_back(state.open_orders[static_cast<std::size_t>(idx)].id);
      opt.action.kind = WorkerAction::Kind::Assign;
      opt.reward = params.reward_per_order * static_cast<double>(fb.orders.size()) - fb.route.duration_s() / 60.0;
      opt.orders = std::move(fb.orders);
      opt.post = worker;
      opt.post.pending = std::move(fb.route.pickups);
      opt.post.charging = false;
      opt.post.charger = -1;
      opts.batches.push_back(std::move(opt));
    }

    opts.null.action = WorkerAction::null();
    opts.null.post = apply_action(worker, opts.null.action, state.open_orders, map, params, now);
    if (worker.is_agv() && !worker.has_orders()) {
      ActionOption charge;
      charge.action = WorkerAction::charge();
      charge.post = apply_action(worker, charge.action, state.open_orders, map, params, now);
      opts.charge = std::move(charge);
    }
    all.push_back(std::move(opts));
  }
  return all;
}

ActionValues immediate_rewards(const std::vector<WorkerOptions>& options) {
  ActionValues values;
  values.reserve(options.size());
  for (const auto& o : options) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(o.action_count()));
    for (int a = 0; a < o.action_count(); ++a) v.push_back(o.option(a).reward);
    values.push_back(std::move(v));
  }
  return values;
}

MenuInstance make_instance(const std::vector<WorkerOptions>& options, int order_count, const ActionValues& values,
                           int candidate_cap) {
  if (values.size() != options.size()) throw std::invalid_argument("make_instance: value count mismatch");
  MenuInstance menu;
  menu.instance.order_count = order_count;
  for (std::size_t w = 0; w < options.size(); ++w) {
    const auto& opts = options[w];
    const auto& v = values[w];
    if (static_cast<int>(v.size()) != opts.action_count())
      throw std::invalid_argument("make_instance: action value count mismatch");
    const std::vector<double> batch_values(v.begin(), v.begin() + opts.batch_count());
    const auto keep = top_candidates(batch_values, candidate_cap);

    WorkerMenu m;
    m.worker_id = opts.worker_id;
    m.is_agv = opts.is_agv;
    for (int b : keep) {
      m.batches.push_back(opts.batches[static_cast<std::size_t>(b)].orders);
      m.batch_coefficients.push_back(batch_values[static_cast<std::size_t>(b)]);
    }
    m.null_coefficient = v[static_cast<std::size_t>(opts.null_action())];
    if (opts.charge) m.charge_coefficient = v[static_cast<std::size_t>(opts.charge_action())];
    menu.instance.workers.push_back(std::move(m));
    menu.batch_map.push_back(keep);
  }
  return menu;
}

std::vector<int> MenuInstance::to_choices(const AllocationSolution& solution,
                                          const std::vector<WorkerOptions>& options) const {
  std::vector<int> choices;
  choices.reserve(solution.actions.size());
  for (std::size_t w = 0; w < solution.actions.size(); ++w) {
    const auto& m = instance.workers[w];
    const int a = solution.actions[w];
    if (a < m.batch_count())
      choices.push_back(batch_map[w][static_cast<std::size_t>(a)]);
    else if (a == m.null_action())
      choices.push_back(options[w].null_action());
    else
      choices.push_back(options[w].charge_action());
  }
  return choices;
}

std::vector<WorkerAction> to_actions(const std::vector<WorkerOptions>& options, const std::vector<int>& choices) {
  if (choices.size() != options.size()) throw std::invalid_argument("to_actions: one choice per worker expected");
  std::vector<WorkerAction> actions;
  actions.reserve(options.size());
  for (std::size_t w = 0; w < options.size(); ++w) actions.push_back(options[w].option(choices[w]).action);
  return actions;
}

}  // namespace agvpick
