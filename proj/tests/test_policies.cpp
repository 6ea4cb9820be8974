#include <gtest/gtest.h>

#include <random>
#include <set>

#include "agvpick/policies.hpp"
#include "support.hpp"

using namespace agvpick;
using agvpick::testing::default_map;
using agvpick::testing::make_order;
using agvpick::testing::make_worker;

namespace {

const FleetParams kParams{};

DecisionContext context(const ValueNet* net = nullptr) {
  DecisionContext c;
  c.map = &default_map();
  c.params = &kParams;
  const ArrivalCurve curve(ArrivalModel{});
  c.scales = FeatureScales::from(default_map(), curve.model(), curve.peak_mean());
  c.net = net;
  return c;
}

SystemState random_state(std::mt19937_64& rng) {
  const GridMap& map = default_map();
  std::uniform_int_distribution<int> loc(0, 179), node(0, map.node_count() - 1), count(0, 10);
  std::uniform_real_distribution<double> battery(10.0, 100.0);
  SystemState s;
  s.epoch = 150;
  s.workers = make_fleet(map, 3, 3, 2, 2);
  for (auto& w : s.workers) {
    w.node = node(rng);
    if (w.is_agv()) w.battery = battery(rng);
  }
  const int n = count(rng);
  for (int i = 0; i < n; ++i) s.open_orders.push_back(make_order(map, i, loc(rng), 45000, 900, i % 5 == 0));
  return s;
}

double total_reward(const std::vector<WorkerOptions>& options, const std::vector<int>& choices) {
  double sum = 0.0;
  for (std::size_t w = 0; w < options.size(); ++w) sum += options[w].option(choices[w]).reward;
  return sum;
}

void expect_consistent(const SystemState& s, const std::vector<WorkerOptions>& options, const std::vector<int>& c) {
  ASSERT_EQ(c.size(), options.size());
  std::set<int> used;
  for (std::size_t w = 0; w < options.size(); ++w) {
    ASSERT_GE(c[w], 0);
    ASSERT_LT(c[w], options[w].action_count());
    for (int o : options[w].option(c[w]).orders) EXPECT_TRUE(used.insert(o).second) << "order used twice";
    if (!s.workers[w].idle()) EXPECT_NE(c[w], options[w].charge_action());
  }
}

}  // namespace

TEST(PolicySpec, ParseAndName) {
  for (const std::string text : {"myopic-ilp", "myopic-hf-20", "myopic-rf-0", "myopic-hf-100"})
    EXPECT_EQ(PolicySpec::parse(text).name(), text);
  const auto n = PolicySpec::parse("neuradp:model.bin");
  EXPECT_EQ(n.kind, PolicySpec::Kind::NeurAdp);
  EXPECT_EQ(n.checkpoint, "model.bin");
  const auto hf = PolicySpec::parse("myopic-hf-20");
  EXPECT_TRUE(hf.humans_first);
  EXPECT_EQ(hf.charge_threshold, 20);
  EXPECT_FALSE(PolicySpec::parse("myopic-rf-20").humans_first);
  for (const std::string bad : {"", "ilp", "myopic-hf-", "myopic-hf-101", "myopic-hf-2x", "myopic-xf-20"})
    EXPECT_THROW(PolicySpec::parse(bad), std::invalid_argument) << bad;
}

TEST(Heuristic, PreferenceOrderDecidesWhoGetsTheOrder) {
  const GridMap& map = default_map();
  SystemState s{100, {make_worker(map, 0, WorkerClass::Human), make_worker(map, 1, WorkerClass::Agv)},
                {make_order(map, 0, 40, 30000, 900)}};
  const auto options = build_options(s, map, kParams);
  ASSERT_EQ(options[0].batch_count(), 1);
  ASSERT_EQ(options[1].batch_count(), 1);
  const auto hf = decide(PolicySpec::heuristic(true, 20), s, options, context()).choices;
  EXPECT_EQ(hf[0], 0);
  EXPECT_EQ(hf[1], options[1].null_action());
  const auto rf = decide(PolicySpec::heuristic(false, 20), s, options, context()).choices;
  EXPECT_EQ(rf[0], options[0].null_action());
  EXPECT_EQ(rf[1], 0);
}

TEST(Heuristic, ChargesBelowThreshold) {
  const GridMap& map = default_map();
  SystemState s{100, {make_worker(map, 0, WorkerClass::Agv, 2, 19.0), make_worker(map, 1, WorkerClass::Agv, 2, 21.0)},
                {}};
  const auto options = build_options(s, map, kParams);
  const auto c = decide(PolicySpec::heuristic(true, 20), s, options, context()).choices;
  EXPECT_EQ(c[0], options[0].charge_action());
  EXPECT_EQ(c[1], options[1].null_action());
}

TEST(Heuristic, TakesTheBestRewardBatchFirst) {
  const GridMap& map = default_map();
  SystemState s{100, {make_worker(map, 0, WorkerClass::Human)},
                {make_order(map, 0, 170, 30000, 900), make_order(map, 1, 3, 30000, 900)}};
  const auto options = build_options(s, map, kParams);
  const auto c = decide(PolicySpec::heuristic(true, 0), s, options, context()).choices;
  double best = -1e18;
  for (const auto& b : options[0].batches) best = std::max(best, b.reward);
  EXPECT_EQ(options[0].option(c[0]).reward, best);
}

TEST(Policies, ChoicesAreConsistentAndIlpDominatesGreedy) {
  std::mt19937_64 rng(12);
  const ValueNet zero;
  for (int trial = 0; trial < 60; ++trial) {
    const SystemState s = random_state(rng);
    const auto options = build_options(s, default_map(), kParams);
    const auto ilp = decide(PolicySpec::myopic_ilp(), s, options, context()).choices;
    const auto hf = decide(PolicySpec::heuristic(true, 20), s, options, context()).choices;
    const auto rf = decide(PolicySpec::heuristic(false, 20), s, options, context()).choices;
    const auto adp = decide(PolicySpec::neuradp(), s, options, context(&zero));
    expect_consistent(s, options, ilp);
    expect_consistent(s, options, hf);
    expect_consistent(s, options, rf);
    expect_consistent(s, options, adp.choices);
    EXPECT_GE(total_reward(options, ilp) + 1e-9, total_reward(options, hf));
    EXPECT_GE(total_reward(options, ilp) + 1e-9, total_reward(options, rf));
    // Zero network: NeurADP is the myopic optimum before top-ups.
    EXPECT_NEAR(total_reward(options, adp.choices), total_reward(options, ilp), 1e-9);
    ASSERT_TRUE(adp.menu.has_value());
    EXPECT_EQ(adp.features.size(), options.size());
  }
}

TEST(Policies, IlpTopsUpIdleAgvs) {
  const GridMap& map = default_map();
  SystemState s{100, {make_worker(map, 0, WorkerClass::Agv, 2, 90.0), make_worker(map, 1, WorkerClass::Agv)}, {}};
  const auto options = build_options(s, map, kParams);
  const auto c = decide(PolicySpec::myopic_ilp(), s, options, context()).choices;
  EXPECT_EQ(c[0], options[0].charge_action());
  EXPECT_EQ(c[1], options[1].null_action());
}

TEST(Policies, NeurAdpNeedsANetwork) {
  const GridMap& map = default_map();
  SystemState s{0, {make_worker(map, 0, WorkerClass::Human)}, {}};
  const auto options = build_options(s, map, kParams);
  EXPECT_THROW(decide(PolicySpec::neuradp(), s, options, context()), std::invalid_argument);
  EXPECT_THROW(decide(PolicySpec::myopic_ilp(), s, {}, context()), std::invalid_argument);
}
