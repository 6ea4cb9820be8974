#include <gtest/gtest.h>

#include <random>

#include "agvpick/allocation.hpp"
#include "support.hpp"

using namespace agvpick;
using agvpick::testing::random_instance;

namespace {

WorkerMenu menu(int id, std::vector<std::vector<int>> batches, std::vector<double> coefs, double null_coef = 0.0) {
  WorkerMenu m;
  m.worker_id = id;
  m.batches = std::move(batches);
  m.batch_coefficients = std::move(coefs);
  m.null_coefficient = null_coef;
  return m;
}

}  // namespace

TEST(Allocation, SingleBatchBeatsNull) {
  const AllocationInstance inst{1, {menu(0, {{0}}, {5.0})}};
  const auto s = solve(inst);
  EXPECT_EQ(s.actions, (std::vector<int>{0}));
  EXPECT_EQ(s.objective, 5.0);
}

TEST(Allocation, SharedOrderGoesToOneWorker) {
  AllocationInstance inst{1, {menu(0, {{0}}, {4.0}, 1.0), menu(1, {{0}}, {4.0}, 2.0)}};
  inst.workers[1].is_agv = true;
  inst.workers[1].charge_coefficient = 3.0;
  const auto s = solve(inst);
  EXPECT_TRUE(satisfies_constraints(inst, s));
  EXPECT_EQ(s.objective, 7.0);
  EXPECT_EQ(s.actions[0], 0);
  EXPECT_EQ(s.actions[1], inst.workers[1].charge_action());
}

TEST(Allocation, EmptyInstance) {
  const auto s = solve(AllocationInstance{});
  EXPECT_TRUE(s.actions.empty());
  EXPECT_EQ(s.objective, 0.0);
}

TEST(Allocation, BruteForceNullOnly) {
  const AllocationInstance inst{0, {menu(0, {}, {}, -2.5)}};
  const auto s = brute_force_solve(inst);
  EXPECT_EQ(s.actions, (std::vector<int>{0}));
  EXPECT_EQ(s.objective, -2.5);
}

TEST(Allocation, BruteForceRefusesLargeInstances) {
  AllocationInstance inst{1, {}};
  for (int w = 0; w < 8; ++w) {
    inst.workers.push_back(menu(w, {}, {}));
    for (int b = 0; b < 9; ++b) {
      inst.workers.back().batches.push_back({0});
      inst.workers.back().batch_coefficients.push_back(1.0);
    }
  }
  EXPECT_THROW(brute_force_solve(inst), std::length_error);
}

TEST(Allocation, ValidateRejectsMalformedMenus) {
  AllocationInstance inst{2, {menu(0, {{0, 0}}, {1.0})}};
  EXPECT_THROW(validate(inst), std::invalid_argument);
  inst.workers[0] = menu(0, {{2}}, {1.0});
  EXPECT_THROW(validate(inst), std::invalid_argument);
  inst.workers[0] = menu(0, {{}}, {1.0});
  EXPECT_THROW(validate(inst), std::invalid_argument);
  inst.workers[0] = menu(0, {{1}}, {std::nan("")});
  EXPECT_THROW(validate(inst), std::invalid_argument);
  inst.workers[0] = menu(0, {{1}}, {1.0});
  inst.workers[0].charge_coefficient = 0.0;
  EXPECT_THROW(validate(inst), std::invalid_argument);
  inst.workers[0].is_agv = true;
  EXPECT_NO_THROW(validate(inst));
}

TEST(Allocation, MatchesBruteForceOnSmallInstances) {
  std::mt19937_64 rng(500);
  for (int i = 0; i < 500; ++i) {
    const auto inst = random_instance(rng, 4, 5, 6, 3);
    const auto got = solve(inst);
    const auto want = brute_force_solve(inst);
    ASSERT_TRUE(satisfies_constraints(inst, got)) << to_json(inst);
    ASSERT_EQ(got.objective, want.objective) << to_json(inst);
  }
}

TEST(Allocation, MatchesBruteForceOnMediumInstances) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 60; ++i) {
    const auto inst = random_instance(rng, 6, 9, 8, 2);
    const auto got = solve(inst);
    const auto want = brute_force_solve(inst, 2e7);
    ASSERT_TRUE(satisfies_constraints(inst, got)) << to_json(inst);
    ASSERT_NEAR(got.objective, want.objective, 1e-9) << to_json(inst);
  }
}

TEST(Allocation, IdenticalWorkersOnIntegerCoefficients) {
  // Twin menus with integer values: exercises symmetry handling and the
  // coefficient-grid pruning against the exhaustive oracle.
  std::mt19937_64 rng(4);
  for (int i = 0; i < 40; ++i) {
    auto inst = random_instance(rng, 1, 8, 10, 2);
    for (auto& c : inst.workers[0].batch_coefficients) c = std::round(c);
    inst.workers[0].null_coefficient = 0.0;
    inst.workers[0].charge_coefficient.reset();
    inst.workers[0].is_agv = false;
    inst.workers.resize(4, inst.workers[0]);
    for (int w = 0; w < 4; ++w) inst.workers[static_cast<std::size_t>(w)].worker_id = w;
    const auto got = solve(inst);
    ASSERT_TRUE(satisfies_constraints(inst, got));
    ASSERT_EQ(got.objective, brute_force_solve(inst, 1e7).objective) << to_json(inst);
  }
}

TEST(Allocation, AddingABatchNeverHurts) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coef(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    auto inst = random_instance(rng, 4, 5, 5, 2);
    if (inst.order_count == 0) continue;
    const double before = solve(inst).objective;
    auto& m = inst.workers[rng() % inst.workers.size()];
    m.batches.push_back({static_cast<int>(rng() % static_cast<unsigned>(inst.order_count))});
    m.batch_coefficients.push_back(coef(rng));
    EXPECT_GE(solve(inst).objective, before);
  }
}

TEST(Allocation, ShiftingOneMenuKeepsItsChoice) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    auto inst = random_instance(rng, 4, 5, 5, 2);
    const auto base = solve(inst);
    const std::size_t w = rng() % inst.workers.size();
    auto& m = inst.workers[w];
    for (auto& c : m.batch_coefficients) c += 3.0;
    m.null_coefficient += 3.0;
    if (m.charge_coefficient) *m.charge_coefficient += 3.0;
    const auto shifted = solve(inst);
    EXPECT_NEAR(shifted.objective, base.objective + 3.0, 1e-9);
    // The chosen action may only change between equal-valued alternatives.
    EXPECT_NEAR(inst.workers[w].coefficient(shifted.actions[w]), inst.workers[w].coefficient(base.actions[w]), 1e-9);
  }
}

TEST(Allocation, SolveIsDeterministic) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng, 4, 5, 6, 3);
    EXPECT_EQ(solve(inst).actions, solve(inst).actions);
  }
}

TEST(Allocation, TopCandidates) {
  const std::vector<double> c{1.0, 5.0, 3.0, 5.0, -1.0};
  EXPECT_EQ(top_candidates(c, 2), (std::vector<int>{1, 3}));
  EXPECT_EQ(top_candidates(c, 3), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(top_candidates(c, 0), (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_EQ(top_candidates(c, 10).size(), 5u);
}

TEST(Allocation, JsonRoundTrip) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto inst = random_instance(rng, 4, 5, 6, 3);
    const auto back = instance_from_json(to_json(inst));
    ASSERT_EQ(back.order_count, inst.order_count);
    ASSERT_EQ(back.workers.size(), inst.workers.size());
    for (std::size_t w = 0; w < inst.workers.size(); ++w) {
      EXPECT_EQ(back.workers[w].batches, inst.workers[w].batches);
      EXPECT_EQ(back.workers[w].batch_coefficients, inst.workers[w].batch_coefficients);
      EXPECT_EQ(back.workers[w].null_coefficient, inst.workers[w].null_coefficient);
      EXPECT_EQ(back.workers[w].charge_coefficient, inst.workers[w].charge_coefficient);
    }
  }
}
