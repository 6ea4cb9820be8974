#include <gtest/gtest.h>

#include <random>
#include <set>

#include "agvpick/feasibility.hpp"
#include "support.hpp"

using namespace agvpick;
using agvpick::testing::bfs_hops;
using agvpick::testing::default_map;
using agvpick::testing::make_order;
using agvpick::testing::make_worker;
using agvpick::testing::oracle_completion;

namespace {

const FleetParams kParams{};

}  // namespace

TEST(Route, EmptyRouteCompletesNow) {
  const Worker w = make_worker(default_map(), 0, WorkerClass::Human);
  const auto r = optimal_route(w, {}, default_map(), 600);
  ASSERT_TRUE(r);
  EXPECT_TRUE(r->pickups.empty());
  EXPECT_EQ(r->completion_s, 600);
  EXPECT_FALSE(r->delivers);
}

TEST(Route, SinglePickupIsOutAndBack) {
  const GridMap& map = default_map();
  const Worker w = make_worker(map, 0, WorkerClass::Human);
  const Order o = make_order(map, 0, 150, 0, 3600);
  const auto r = optimal_route(w, std::vector<Order>{o}, map, 0);
  ASSERT_TRUE(r);
  const int hops = bfs_hops(map, map.drop_off())[static_cast<std::size_t>(o.pickup_node)];
  EXPECT_EQ(r->completion_s, 2 * hops * 30);
  EXPECT_EQ(r->end_node, map.drop_off());
}

TEST(Route, DeadlineSelectsTheOnlyLegalOrder) {
  const GridMap& map = default_map();
  Worker w = make_worker(map, 0, WorkerClass::Human);
  w.node = map.pickup_node(170);
  Order a = make_order(map, 0, 171, 0, 3600);
  Order b = make_order(map, 1, 0, 0, 3600);
  const auto leg = [&](NodeId x, NodeId y) { return bfs_hops(map, x)[static_cast<std::size_t>(y)] * 30; };
  const int a_first = leg(w.node, a.pickup_node) + leg(a.pickup_node, b.pickup_node) + leg(b.pickup_node, map.drop_off());
  const int b_first = leg(w.node, b.pickup_node) + leg(b.pickup_node, a.pickup_node) + leg(a.pickup_node, map.drop_off());
  ASSERT_LT(a_first, b_first);
  // Every order is delivered at the single drop-off, so a deadline equal to
  // the faster completion rules out the other visiting order.
  b.deadline_s = a_first;
  const auto r = optimal_route(w, std::vector<Order>{b, a}, map, 0);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->completion_s, a_first);
  EXPECT_EQ(r->pickups[0].id, 0);
  b.deadline_s = a_first - 1;
  EXPECT_FALSE(optimal_route(w, std::vector<Order>{a, b}, map, 0));
}

TEST(Route, MatchesPermutationOracle) {
  const GridMap& map = default_map();
  std::mt19937 rng(21);
  std::uniform_int_distribution<int> loc(0, 179), delay(120, 1200), node(0, map.node_count() - 1);
  for (int i = 0; i < 300; ++i) {
    Worker w = make_worker(map, 0, WorkerClass::Human, 3);
    w.node = node(rng);
    std::vector<Order> pickups;
    const int k = 1 + i % 3;
    for (int j = 0; j < k; ++j) pickups.push_back(make_order(map, j, loc(rng), 0, delay(rng)));
    const auto got = optimal_route(w, pickups, map, 0);
    const auto want = oracle_completion(map, w, pickups, 0);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (got) EXPECT_EQ(got->completion_s, *want);
  }
}

TEST(Route, EqualTimesPreferSmallerIds) {
  const GridMap& map = default_map();
  const Worker w = make_worker(map, 0, WorkerClass::Human);
  const Order a = make_order(map, 5, 60, 0, 3600);
  const Order b = make_order(map, 3, 60, 0, 3600);
  const auto r = optimal_route(w, std::vector<Order>{a, b}, map, 0);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->pickups[0].id, 3);
}

TEST(Battery, RequiredExamples) {
  const GridMap& map = default_map();
  Worker w = make_worker(map, 0, WorkerClass::Agv);
  w.node = map.chargers()[0];
  Route empty;
  empty.end_node = w.node;
  EXPECT_DOUBLE_EQ(battery_required(w, empty, map, kParams), 0.0);

  // 10-minute route ending 3 minutes from the nearest charger: 6.5%.
  NodeId end = -1;
  for (NodeId n = 0; n < map.node_count() && end < 0; ++n)
    if (map.nearest_charger(n, WorkerClass::Agv).seconds == 180) end = n;
  ASSERT_GE(end, 0);
  Route r;
  r.start_s = 0;
  r.completion_s = 600;
  r.end_node = end;
  EXPECT_DOUBLE_EQ(battery_required(w, r, map, kParams), 6.5);
  r.completion_s = 660;
  EXPECT_GT(battery_required(w, r, map, kParams), 6.5);
}

TEST(Feasible, Examples) {
  const GridMap& map = default_map();
  const Worker human = make_worker(map, 0, WorkerClass::Human);
  EXPECT_TRUE(is_feasible(human, {}, map, 0, kParams));
  const Order late = make_order(map, 0, 179, 0, 60);
  EXPECT_FALSE(is_feasible(human, std::vector<Order>{late}, map, 0, kParams));

  const Worker low = make_worker(map, 1, WorkerClass::Agv, 2, 3.0);
  for (int p = 0; p < 180; ++p) {
    const Order o = make_order(map, 0, p, 0, 3600);
    const auto r = optimal_route(low, std::vector<Order>{o}, map, 0);
    if (r && battery_required(low, *r, map, kParams) >= 3.5)
      EXPECT_FALSE(is_feasible(low, std::vector<Order>{o}, map, 0, kParams));
  }
}

TEST(Feasible, HumanOnlyOrdersNeverGoToAgvs) {
  const GridMap& map = default_map();
  const Worker agv = make_worker(map, 0, WorkerClass::Agv);
  const std::vector<Order> open{make_order(map, 0, 4, 0, 900, true)};
  EXPECT_TRUE(matching_feasibility(agv, open, map, 0, kParams).batches.empty());
  const Worker human = make_worker(map, 1, WorkerClass::Human);
  EXPECT_EQ(matching_feasibility(human, open, map, 0, kParams).batches.size(), 1u);
}

TEST(Feasible, FullWorkersGetNothing) {
  const GridMap& map = default_map();
  Worker w = make_worker(map, 0, WorkerClass::Human);
  w.carried = {make_order(map, 8, 1, 0, 900), make_order(map, 9, 2, 0, 900)};
  const std::vector<Order> open{make_order(map, 0, 3, 0, 900)};
  EXPECT_TRUE(matching_feasibility(w, open, map, 0, kParams).batches.empty());
}

TEST(Feasible, TwoLooseOrdersGiveThreeBatches) {
  const GridMap& map = default_map();
  const Worker w = make_worker(map, 0, WorkerClass::Human);
  const std::vector<Order> open{make_order(map, 0, 3, 0, 3600), make_order(map, 1, 50, 0, 3600)};
  const auto set = matching_feasibility(w, open, map, 0, kParams);
  ASSERT_EQ(set.batches.size(), 3u);
  EXPECT_EQ(set.batches[0].orders, (std::vector<int>{0}));
  EXPECT_EQ(set.batches[1].orders, (std::vector<int>{1}));
  EXPECT_EQ(set.batches[2].orders, (std::vector<int>{0, 1}));
}

TEST(Feasible, MatchesPowerSetOracle) {
  const GridMap& map = default_map();
  std::mt19937 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = agvpick::testing::random_context(map, rng, trial);
    std::set<std::vector<int>> got;
    for (const auto& b : matching_feasibility(c.worker, c.open, map, c.now_s, kParams).batches) got.insert(b.orders);
    ASSERT_EQ(got, agvpick::testing::oracle_feasible_sets(map, c.worker, c.open, c.now_s)) << "trial " << trial;
  }
}

TEST(Feasible, SubsetsOfFeasibleBatchesAreFeasible) {
  const GridMap& map = default_map();
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> loc(0, 179);
  std::uniform_real_distribution<double> battery(3.0, 30.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Worker w = make_worker(map, 0, WorkerClass::Agv, 3, battery(rng));
    std::vector<Order> open;
    for (int i = 0; i < 5; ++i) open.push_back(make_order(map, i, loc(rng), 0, 600 + 60 * i));
    for (const auto& b : matching_feasibility(w, open, map, 0, kParams).batches)
      for (std::size_t drop = 0; drop < b.orders.size() && b.orders.size() > 1; ++drop) {
        std::vector<Order> sub;
        for (std::size_t k = 0; k < b.orders.size(); ++k)
          if (k != drop) sub.push_back(open[static_cast<std::size_t>(b.orders[k])]);
        EXPECT_TRUE(is_feasible(w, sub, map, 0, kParams));
      }
  }
}

TEST(Feasible, CachedRoutesReplayOnTime) {
  const GridMap& map = default_map();
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> loc(0, 179);
  std::uniform_real_distribution<double> battery(4.0, 40.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Worker w = make_worker(map, 0, WorkerClass::Agv, 2, battery(rng));
    std::vector<Order> open;
    for (int i = 0; i < 4; ++i) open.push_back(make_order(map, i, loc(rng), 0, 900));
    for (const auto& b : matching_feasibility(w, open, map, 0, kParams).batches) {
      std::vector<int> ids;
      for (int i : b.orders) ids.push_back(open[static_cast<std::size_t>(i)].id);
      const SystemState s{0, {w}, open};
      const auto post = statepost(s, std::vector<WorkerAction>{WorkerAction::assign(ids)}, map, kParams);
      const auto done = advance({0, post.workers, {}}, b.route.completion_s, map, kParams);
      ASSERT_EQ(done.completions.size(), ids.size());
      for (const auto& c : done.completions) EXPECT_LE(c.completed_s, c.deadline_s);
      const auto leg = map.nearest_charger(map.drop_off(), WorkerClass::Agv);
      EXPECT_GE(done.state.workers[0].battery, leg.seconds / 60.0 * 0.5);
    }
  }
}
