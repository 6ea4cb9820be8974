#include "agvpick/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "json.hpp"

namespace agvpick {

double WorkerMenu::coefficient(int action) const {
  if (action >= 0 && action < batch_count()) return batch_coefficients[static_cast<std::size_t>(action)];
  if (action == null_action()) return null_coefficient;
  if (action == charge_action() && charge_coefficient) return *charge_coefficient;
  throw std::out_of_range("allocation: unknown action id");
}

void validate(const AllocationInstance& instance) {
  if (instance.order_count < 0) throw std::invalid_argument("allocation: negative order count");
  for (const auto& w : instance.workers) {
    const std::string who = "allocation: worker " + std::to_string(w.worker_id);
    if (w.batches.size() != w.batch_coefficients.size()) throw std::invalid_argument(who + ": coefficient count");
    if (!std::isfinite(w.null_coefficient)) throw std::invalid_argument(who + ": non-finite Null coefficient");
    if (w.charge_coefficient) {
      if (!w.is_agv) throw std::invalid_argument(who + ": humans cannot charge");
      if (!std::isfinite(*w.charge_coefficient)) throw std::invalid_argument(who + ": non-finite Charge coefficient");
    }
    for (std::size_t b = 0; b < w.batches.size(); ++b) {
      if (!std::isfinite(w.batch_coefficients[b])) throw std::invalid_argument(who + ": non-finite coefficient");
      const auto& batch = w.batches[b];
      if (batch.empty()) throw std::invalid_argument(who + ": empty batch");
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i] < 0 || batch[i] >= instance.order_count)
          throw std::invalid_argument(who + ": order index out of range");
        for (std::size_t j = 0; j < i; ++j)
          if (batch[j] == batch[i]) throw std::invalid_argument(who + ": duplicate order in batch");
      }
    }
  }
}

bool satisfies_constraints(const AllocationInstance& instance, const AllocationSolution& solution) {
  if (solution.actions.size() != instance.workers.size()) return false;
  std::vector<char> used(static_cast<std::size_t>(instance.order_count), 0);
  double objective = 0.0;
  for (std::size_t w = 0; w < instance.workers.size(); ++w) {
    const auto& menu = instance.workers[w];
    const int a = solution.actions[w];
    if (a < 0 || a >= menu.action_count()) return false;
    objective += menu.coefficient(a);
    if (a < menu.batch_count())
      for (int o : menu.batches[static_cast<std::size_t>(a)]) {
        if (used[static_cast<std::size_t>(o)]) return false;
        used[static_cast<std::size_t>(o)] = 1;
      }
  }
  return objective == solution.objective;
}

namespace {

// Dense-tableau simplex for max g.x subject to A x <= b, x >= 0, with A and b
// nonnegative, so the origin is feasible and one phase suffices. Columns are
// given as (row, coefficient) lists. Dantzig pricing, falling back to Bland's
// rule on long degenerate streaks.
struct PackingLp {
  std::vector<double> x;
  std::vector<double> duals;
};

using SparseColumn = std::vector<std::pair<int, double>>;

PackingLp solve_packing_lp(const std::vector<double>& rhs, const std::vector<SparseColumn>& columns,
                           const std::vector<double>& gain) {
  const std::size_t rows = rhs.size();
  const std::size_t cols = columns.size();
  const std::size_t vars = cols + rows;
  const auto I = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(I(rows + 1), I(vars + 1));
  for (std::size_t j = 0; j < cols; ++j) {
    for (const auto& [r, v] : columns[j]) tab(r, I(j)) = v;
    tab(I(rows), I(j)) = -gain[j];
  }
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    tab(I(i), I(cols + i)) = 1.0;
    tab(I(i), I(vars)) = rhs[i];
    basis[i] = cols + i;
  }

  constexpr double eps = 1e-9;
  int degenerate = 0;
  for (int iter = 0; iter < 20000; ++iter) {
    std::size_t enter = vars;
    if (degenerate < 50) {
      double most = -eps;
      for (std::size_t j = 0; j < vars; ++j)
        if (tab(I(rows), I(j)) < most) {
          most = tab(I(rows), I(j));
          enter = j;
        }
    } else {
      for (std::size_t j = 0; j < vars && enter == vars; ++j)
        if (tab(I(rows), I(j)) < -eps) enter = j;
    }
    if (enter == vars) break;
    std::size_t leave = rows;
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
      const double a = tab(I(i), I(enter));
      if (a <= eps) continue;
      const double r = tab(I(i), I(vars)) / a;
      if (r < ratio - eps || (r < ratio + eps && leave < rows && basis[i] < basis[leave])) {
        ratio = r;
        leave = i;
      }
    }
    if (leave == rows) break;
    degenerate = ratio < eps ? degenerate + 1 : 0;
    tab.row(I(leave)) /= tab(I(leave), I(enter));
    for (std::size_t i = 0; i <= rows; ++i) {
      const double f = tab(I(i), I(enter));
      if (i != leave && f != 0.0) tab.row(I(i)) -= f * tab.row(I(leave));
    }
    basis[leave] = enter;
  }

  PackingLp lp;
  lp.x.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] < cols) lp.x[basis[i]] = tab(I(i), I(vars));
  lp.duals.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) lp.duals[i] = std::max(0.0, tab(I(rows), I(cols + i)));
  return lp;
}

// Depth-first branch-and-bound over workers in index order. Each expanded
// node solves the packing relaxation of the remaining workers and free
// orders, tightened by odd-set cuts sum_b floor(|b & S| / 2) x_b <=
// floor(|S| / 2), and prices its children with the LP duals. The resulting
// Lagrangian bound is valid whatever the LP's numerical accuracy. Workers
// with identical menus take non-decreasing action ids. When every coefficient
// lies on a grid of step 1/q, an improvement must be worth at least one step.
class BranchAndBound {
 public:
  explicit BranchAndBound(const AllocationInstance& instance)
      : inst_(instance),
        n_(instance.workers.size()),
        m_(static_cast<std::size_t>(instance.order_count)),
        used_(m_, 0),
        actions_(instance.workers.size(), 0),
        twin_(instance.workers.size(), -1) {
    for (const auto& menu : inst_.workers) {
      std::vector<double> c(static_cast<std::size_t>(menu.action_count()));
      for (int a = 0; a < menu.action_count(); ++a) c[static_cast<std::size_t>(a)] = menu.coefficient(a);
      coef_.push_back(std::move(c));
    }
    for (std::size_t w = 1; w < n_; ++w)
      for (std::size_t v = w; v-- > 0;)
        if (same_menu(inst_.workers[v], inst_.workers[w])) {
          twin_[w] = static_cast<int>(v);
          break;
        }
    detect_grid();
    greedy_incumbent();
  }

  AllocationSolution run() {
    dfs(0, 0.0, {});
    return {best_actions_, best_};
  }

 private:
  using OrderSet = std::vector<char>;

  struct Column {
    std::size_t worker;
    int action;
  };

  static bool same_menu(const WorkerMenu& a, const WorkerMenu& b) {
    return a.batches == b.batches && a.batch_coefficients == b.batch_coefficients &&
           a.null_coefficient == b.null_coefficient && a.charge_coefficient == b.charge_coefficient;
  }

  const std::vector<int>& batch(std::size_t w, int a) const {
    return inst_.workers[w].batches[static_cast<std::size_t>(a)];
  }
  bool is_batch(std::size_t w, int a) const { return a < inst_.workers[w].batch_count(); }
  double coef(std::size_t w, int a) const { return coef_[w][static_cast<std::size_t>(a)]; }
  double null_coef(std::size_t w) const { return coef(w, inst_.workers[w].null_action()); }

  bool compatible(std::size_t w, int a) const {
    if (!is_batch(w, a)) return true;
    for (int o : batch(w, a))
      if (used_[static_cast<std::size_t>(o)]) return false;
    return true;
  }

  void mark(std::size_t w, int a, char value) {
    if (!is_batch(w, a)) return;
    for (int o : batch(w, a)) used_[static_cast<std::size_t>(o)] = value;
  }

  // floor(|batch & set| / 2): the action's coefficient in an odd-set cut.
  double cut_weight(std::size_t w, int a, const OrderSet& set) const {
    if (!is_batch(w, a)) return 0.0;
    int inside = 0;
    for (int o : batch(w, a)) inside += set[static_cast<std::size_t>(o)];
    return static_cast<double>(inside / 2);
  }

  static double cut_rhs(const OrderSet& set) {
    return static_cast<double>(std::count(set.begin(), set.end(), 1) / 2);
  }

  void detect_grid() {
    for (double q : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 10.0, 12.0, 20.0, 30.0, 60.0}) {
      bool on_grid = true;
      for (const auto& c : coef_)
        for (double v : c) {
          const double s = v * q;
          on_grid = on_grid && std::abs(s - std::round(s)) <= 1e-9 * std::max(1.0, std::abs(s));
        }
      if (on_grid) {
        step_ = 1.0 / q;
        return;
      }
    }
  }

  // True when a subtree bounded by `bound` may hold a strictly better solution.
  bool beats(double bound) const {
    const double scale = std::max(1.0, std::abs(best_));
    if (step_ > 0.0) return bound > best_ + step_ - 1e-7 * scale;
    return bound > best_ + 1e-9 * scale;
  }

  // Objective of a complete assignment, summed in worker order.
  void offer(const std::vector<int>& actions) {
    double total = 0.0;
    for (std::size_t w = 0; w < n_; ++w) total += coef(w, actions[w]);
    if (total > best_) {
      best_ = total;
      best_actions_ = actions;
    }
  }

  void greedy_incumbent() {
    std::vector<int> actions(n_);
    for (std::size_t w = 0; w < n_; ++w) {
      int pick = -1;
      for (int a = 0; a < static_cast<int>(coef_[w].size()); ++a)
        if (compatible(w, a) && (pick < 0 || coef(w, a) > coef(w, pick))) pick = a;
      actions[w] = pick;
      mark(w, pick, 1);
    }
    std::fill(used_.begin(), used_.end(), 0);
    best_ = -std::numeric_limits<double>::infinity();
    offer(actions);
  }

  // Completes workers from `from` on, taking LP columns in decreasing value.
  void round(std::size_t from, const std::vector<Column>& cols, const std::vector<double>& x) {
    std::vector<std::size_t> idx(cols.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
    std::vector<int> actions = actions_;
    for (std::size_t w = from; w < n_; ++w) actions[w] = -1;
    std::vector<char> used = used_;
    for (std::size_t k : idx) {
      const auto [w, a] = cols[k];
      if (x[k] <= 1e-9 || actions[w] >= 0) continue;
      bool ok = true;
      if (is_batch(w, a))
        for (int o : batch(w, a)) ok = ok && !used[static_cast<std::size_t>(o)];
      if (!ok) continue;
      actions[w] = a;
      if (is_batch(w, a))
        for (int o : batch(w, a)) used[static_cast<std::size_t>(o)] = 1;
    }
    for (std::size_t w = from; w < n_; ++w)
      if (actions[w] < 0) actions[w] = inst_.workers[w].null_action();
    offer(actions);
  }

  // Odd order sets joined by fractional multi-order batches whose cut the LP
  // point violates.
  std::vector<OrderSet> separate(const std::vector<Column>& cols, const std::vector<double>& x) const {
    std::vector<std::size_t> parent(m_);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](std::size_t o) {
      while (parent[o] != o) o = parent[o] = parent[parent[o]];
      return o;
    };
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto [w, a] = cols[j];
      if (x[j] <= 1e-6 || x[j] >= 1.0 - 1e-6 || !is_batch(w, a) || batch(w, a).size() < 2) continue;
      const auto& b = batch(w, a);
      for (std::size_t k = 1; k < b.size(); ++k)
        parent[find(static_cast<std::size_t>(b[k]))] = find(static_cast<std::size_t>(b[0]));
    }
    std::map<std::size_t, OrderSet> groups;
    for (std::size_t o = 0; o < m_; ++o) {
      if (used_[o]) continue;
      auto [it, fresh] = groups.try_emplace(find(o), m_, 0);
      it->second[o] = 1;
    }
    std::vector<OrderSet> cuts;
    for (auto& [root, set] : groups) {
      const auto size = std::count(set.begin(), set.end(), 1);
      if (size < 3 || size % 2 == 0) continue;
      double lhs = 0.0;
      for (std::size_t j = 0; j < cols.size(); ++j)
        if (x[j] > 1e-9) lhs += x[j] * cut_weight(cols[j].worker, cols[j].action, set);
      if (lhs > cut_rhs(set) + 1e-6) cuts.push_back(std::move(set));
    }
    return cuts;
  }

  void dfs(std::size_t w, double partial, const std::vector<OrderSet>& inherited) {
    if (w == n_) {
      offer(actions_);
      return;
    }

    // Cuts of the parent restricted to the free orders.
    std::vector<OrderSet> cuts;
    for (const auto& set : inherited) {
      OrderSet s(m_, 0);
      for (std::size_t o = 0; o < m_; ++o) s[o] = set[o] && !used_[o];
      const auto size = std::count(s.begin(), s.end(), 1);
      if (size >= 3 && size % 2 == 1) cuts.push_back(std::move(s));
    }

    // Packing relaxation of workers w.. and the free orders.
    std::vector<int> order_row(m_, -1);
    std::size_t base_rows = n_ - w;
    for (std::size_t o = 0; o < m_; ++o)
      if (!used_[o]) order_row[o] = static_cast<int>(base_rows++);
    std::vector<Column> cols;
    std::vector<SparseColumn> base;
    std::vector<double> gain;
    for (std::size_t v = w; v < n_; ++v)
      for (int a = 0; a < static_cast<int>(coef_[v].size()); ++a) {
        const double g = coef(v, a) - null_coef(v);
        if (g <= 0.0 || !compatible(v, a)) continue;
        SparseColumn col{{static_cast<int>(v - w), 1.0}};
        if (is_batch(v, a))
          for (int o : batch(v, a)) col.emplace_back(order_row[static_cast<std::size_t>(o)], 1.0);
        cols.push_back({v, a});
        base.push_back(std::move(col));
        gain.push_back(g);
      }

    std::vector<double> lambda(m_, 0.0);
    std::vector<double> mu;
    if (!cols.empty()) {
      PackingLp lp;
      const int rounds = w == 0 ? 50 : 8;
      for (int round_no = 0;; ++round_no) {
        std::vector<double> rhs(base_rows, 1.0);
        std::vector<SparseColumn> columns = base;
        for (const auto& set : cuts) {
          const int row = static_cast<int>(rhs.size());
          rhs.push_back(cut_rhs(set));
          for (std::size_t j = 0; j < cols.size(); ++j) {
            const double k = cut_weight(cols[j].worker, cols[j].action, set);
            if (k > 0.0) columns[j].emplace_back(row, k);
          }
        }
        lp = solve_packing_lp(rhs, columns, gain);
        if (round_no == rounds) break;
        auto fresh = separate(cols, lp.x);
        if (fresh.empty()) break;
        for (auto& set : fresh) cuts.push_back(std::move(set));
      }
      for (std::size_t o = 0; o < m_; ++o)
        if (order_row[o] >= 0) lambda[o] = lp.duals[static_cast<std::size_t>(order_row[o])];
      mu.assign(lp.duals.begin() + static_cast<std::ptrdiff_t>(base_rows), lp.duals.end());
      mu.resize(cuts.size(), 0.0);
      round(w, cols, lp.x);
    }

    const auto reduced = [&](std::size_t v, int a) {
      double r = coef(v, a);
      if (!is_batch(v, a)) return r;
      for (int o : batch(v, a)) r -= lambda[static_cast<std::size_t>(o)];
      for (std::size_t k = 0; k < mu.size(); ++k)
        if (mu[k] > 0.0) r -= mu[k] * cut_weight(v, a, cuts[k]);
      return r;
    };

    // Bound on workers after w: duals of the free orders and cuts plus each
    // later worker's best reduced coefficient.
    std::vector<double> best_reduced(n_, 0.0);
    for (std::size_t v = w; v < n_; ++v) best_reduced[v] = null_coef(v);
    for (const auto& c : cols) best_reduced[c.worker] = std::max(best_reduced[c.worker], reduced(c.worker, c.action));
    double after = 0.0;
    for (std::size_t o = 0; o < m_; ++o)
      if (!used_[o]) after += lambda[o];
    for (std::size_t k = 0; k < mu.size(); ++k) after += mu[k] * cut_rhs(cuts[k]);
    for (std::size_t v = w + 1; v < n_; ++v) after += best_reduced[v];
    if (!beats(partial + best_reduced[w] + after)) return;

    const int lowest = twin_[w] >= 0 ? actions_[static_cast<std::size_t>(twin_[w])] : 0;
    std::vector<std::pair<double, int>> children;
    for (int a = lowest; a < static_cast<int>(coef_[w].size()); ++a)
      if (compatible(w, a)) children.emplace_back(reduced(w, a), a);
    std::stable_sort(children.begin(), children.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (const auto& [r, a] : children) {
      if (!beats(partial + r + after)) break;
      actions_[w] = a;
      mark(w, a, 1);
      dfs(w + 1, partial + coef(w, a), cuts);
      mark(w, a, 0);
    }
  }

  const AllocationInstance& inst_;
  std::size_t n_;
  std::size_t m_;
  std::vector<char> used_;
  std::vector<int> actions_;
  std::vector<int> twin_;
  std::vector<std::vector<double>> coef_;
  std::vector<int> best_actions_;
  double best_ = 0.0;
  double step_ = 0.0;
};

}  // namespace

AllocationSolution solve(const AllocationInstance& instance) {
  validate(instance);
  if (instance.workers.empty()) return {};
  return BranchAndBound(instance).run();
}

AllocationSolution brute_force_solve(const AllocationInstance& instance, double max_combinations) {
  validate(instance);
  double combos = 1.0;
  for (const auto& w : instance.workers) combos *= w.action_count();
  if (combos > max_combinations) throw std::length_error("brute_force_solve: instance too large");
  if (instance.workers.empty()) return {};

  const std::size_t n = instance.workers.size();
  std::vector<int> pick(n, 0);
  AllocationSolution best;
  best.objective = -std::numeric_limits<double>::infinity();
  std::vector<char> used(static_cast<std::size_t>(instance.order_count));
  while (true) {
    std::fill(used.begin(), used.end(), 0);
    bool ok = true;
    double objective = 0.0;
    for (std::size_t w = 0; w < n && ok; ++w) {
      const auto& menu = instance.workers[w];
      objective += menu.coefficient(pick[w]);
      if (pick[w] < menu.batch_count())
        for (int o : menu.batches[static_cast<std::size_t>(pick[w])]) {
          if (used[static_cast<std::size_t>(o)]) ok = false;
          used[static_cast<std::size_t>(o)] = 1;
        }
    }
    if (ok && objective > best.objective) {
      best.objective = objective;
      best.actions = pick;
    }
    std::size_t w = 0;
    while (w < n && ++pick[w] == instance.workers[w].action_count()) pick[w++] = 0;
    if (w == n) break;
  }
  return best;
}

std::vector<int> top_candidates(const std::vector<double>& coefficients, int cap) {
  std::vector<int> ids(coefficients.size());
  std::iota(ids.begin(), ids.end(), 0);
  if (cap <= 0 || static_cast<std::size_t>(cap) >= ids.size()) return ids;
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    return coefficients[static_cast<std::size_t>(a)] > coefficients[static_cast<std::size_t>(b)];
  });
  ids.resize(static_cast<std::size_t>(cap));
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string to_json(const AllocationInstance& instance) {
  nlohmann::json j;
  j["order_count"] = instance.order_count;
  j["workers"] = nlohmann::json::array();
  for (const auto& w : instance.workers) {
    nlohmann::json m;
    m["worker_id"] = w.worker_id;
    m["is_agv"] = w.is_agv;
    m["batches"] = w.batches;
    m["batch_coefficients"] = w.batch_coefficients;
    m["null_coefficient"] = w.null_coefficient;
    if (w.charge_coefficient) m["charge_coefficient"] = *w.charge_coefficient;
    j["workers"].push_back(std::move(m));
  }
  return j.dump();
}

AllocationInstance instance_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  AllocationInstance instance;
  instance.order_count = j.at("order_count").get<int>();
  for (const auto& m : j.at("workers")) {
    WorkerMenu w;
    w.worker_id = m.at("worker_id").get<int>();
    w.is_agv = m.at("is_agv").get<bool>();
    w.batches = m.at("batches").get<std::vector<std::vector<int>>>();
    w.batch_coefficients = m.at("batch_coefficients").get<std::vector<double>>();
    w.null_coefficient = m.at("null_coefficient").get<double>();
    if (m.contains("charge_coefficient")) w.charge_coefficient = m.at("charge_coefficient").get<double>();
    instance.workers.push_back(std::move(w));
  }
  validate(instance);
  return instance;
}

}  // namespace agvpick
