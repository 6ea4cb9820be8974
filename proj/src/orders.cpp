#include "agvpick/orders.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace agvpick {

ArrivalCurve::ArrivalCurve(ArrivalModel model) : model_(model) {
  if (model_.beta_alpha <= 0.0 || model_.beta_beta <= 0.0)
    throw std::invalid_argument("arrivals: beta parameters must be positive");
  if (model_.horizon_epochs < 1) throw std::invalid_argument("arrivals: horizon must be >= 1");
  if (model_.daily_volume < 0.0) throw std::invalid_argument("arrivals: daily_volume must be >= 0");
  if (model_.human_only_prob < 0.0 || model_.human_only_prob > 1.0)
    throw std::invalid_argument("arrivals: human_only_prob must be in [0, 1]");
  if (model_.delay_minutes <= 0) throw std::invalid_argument("arrivals: delay_minutes must be positive");
  if (model_.interval_seconds <= 0) throw std::invalid_argument("arrivals: interval_seconds must be positive");

  const double a = model_.beta_alpha;
  const double b = model_.beta_beta;
  log_norm_ = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);

  double total = 0.0;
  for (int t = 0; t < model_.horizon_epochs; ++t)
    total += density(static_cast<double>(t) / model_.horizon_epochs);
  scale_ = total > 0.0 ? model_.daily_volume / total : 0.0;
  for (int t = 0; t < model_.horizon_epochs; ++t) peak_ = std::max(peak_, epoch_mean(t));
}

double ArrivalCurve::density(double x) const {
  if (x <= 0.0 || x >= 1.0) {
    // Boundary values of the density; only finite when the exponent is 0.
    if (x <= 0.0) return model_.beta_alpha == 1.0 ? std::exp(log_norm_) : 0.0;
    return model_.beta_beta == 1.0 ? std::exp(log_norm_) : 0.0;
  }
  return std::exp(log_norm_ + (model_.beta_alpha - 1.0) * std::log(x) +
                  (model_.beta_beta - 1.0) * std::log1p(-x));
}

double ArrivalCurve::epoch_mean(int t) const {
  if (t < 0 || t > model_.horizon_epochs) throw std::out_of_range("arrivals: epoch outside horizon");
  return scale_ * density(static_cast<double>(t) / model_.horizon_epochs);
}

double epoch_mean(const ArrivalModel& model, int t) { return ArrivalCurve(model).epoch_mean(t); }

std::vector<Order> ArrivalCurve::sample_epoch_orders(const GridMap& map, int t, Rng& rng,
                                                     int& next_id) const {
  std::normal_distribution<double> count_dist(epoch_mean(t), 1.0);
  const double drawn = std::round(count_dist(rng));
  const int count = drawn > 0.0 ? static_cast<int>(drawn) : 0;

  std::vector<Order> orders;
  if (count == 0) return orders;

  std::poisson_distribution<int> weight_dist(1.0);
  std::vector<double> weights(static_cast<std::size_t>(map.pickup_count()));
  double total = 0.0;
  for (auto& w : weights) {
    w = weight_dist(rng);
    total += w;
  }
  if (total == 0.0) weights.assign(weights.size(), 1.0);
  std::discrete_distribution<int> location(weights.begin(), weights.end());
  std::bernoulli_distribution human_only(model_.human_only_prob);

  const int arrival_s = t * model_.interval_seconds;
  orders.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Order o;
    o.id = next_id++;
    o.pickup = location(rng);
    o.pickup_node = map.pickup_node(o.pickup);
    o.human_only = human_only(rng);
    o.arrival_epoch = t;
    o.arrival_s = arrival_s;
    o.deadline_s = arrival_s + model_.delay_minutes * 60;
    orders.push_back(o);
  }
  return orders;
}

DayOrders ArrivalCurve::sample_day(const GridMap& map, std::uint64_t seed) const {
  Rng rng(seed);
  DayOrders day(static_cast<std::size_t>(model_.horizon_epochs));
  int next_id = 0;
  for (int t = 0; t < model_.horizon_epochs; ++t)
    day[static_cast<std::size_t>(t)] = sample_epoch_orders(map, t, rng, next_id);
  return day;
}

void write_order_csv(std::ostream& out, const DayOrders& day) {
  out << "id,epoch,pickup,human_only,deadline\n";
  for (const auto& epoch : day)
    for (const auto& o : epoch)
      out << o.id << ',' << o.arrival_epoch << ',' << o.pickup << ',' << (o.human_only ? 1 : 0) << ','
          << o.deadline_s << '\n';
}

DayOrders read_order_csv(std::istream& in, const GridMap& map, const ArrivalModel& model) {
  DayOrders day(static_cast<std::size_t>(model.horizon_epochs));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("id,", 0) == 0) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<long long> v;
    while (std::getline(fields, cell, ',')) {
      try {
        v.push_back(std::stoll(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad field '" + cell + "'");
      }
    }
    if (v.size() != 5) throw std::runtime_error("trace line " + std::to_string(line_no) + ": expected 5 fields");
    Order o;
    o.id = static_cast<int>(v[0]);
    o.arrival_epoch = static_cast<int>(v[1]);
    o.pickup = static_cast<int>(v[2]);
    o.human_only = v[3] != 0;
    o.deadline_s = static_cast<int>(v[4]);
    if (o.arrival_epoch < 0 || o.arrival_epoch >= model.horizon_epochs)
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": epoch outside horizon");
    if (o.pickup < 0 || o.pickup >= map.pickup_count())
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": unknown pick-up location");
    o.pickup_node = map.pickup_node(o.pickup);
    o.arrival_s = o.arrival_epoch * model.interval_seconds;
    if (o.deadline_s <= o.arrival_s)
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": deadline before arrival");
    day[static_cast<std::size_t>(o.arrival_epoch)].push_back(o);
  }
  return day;
}

std::uint64_t hash_orders(const DayOrders& day) {
  // FNV-1a over the fields that identify a trace.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto feed = [&h](long long v) {
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<std::uint64_t>(v >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& epoch : day)
    for (const auto& o : epoch) {
      feed(o.id);
      feed(o.arrival_epoch);
      feed(o.pickup);
      feed(o.human_only);
      feed(o.deadline_s);
    }
  return h;
}

}  // namespace agvpick
