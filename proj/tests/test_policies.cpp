#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "reference_values.hpp"
#include "tiersched/policies.hpp"
#include "tiersched/workload.hpp"

using namespace tiersched;

namespace {

std::vector<std::size_t> wrr_sequence(const std::vector<std::uint32_t>& weights, std::size_t count) {
  WrrCursor cursor;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto [k, next] = dispatch_wrr(weights, cursor);
    out.push_back(k);
    cursor = next;
  }
  return out;
}

TierSnapshot with_lengths(const std::vector<std::size_t>& lengths) {
  TierSnapshot s;
  JobId id = 1;
  for (auto len : lengths) {
    s.queues.emplace_back();
    s.busy_until.push_back(0.0);
    for (std::size_t i = 0; i < len; ++i) {
      s.exec_of[id] = 1.0;
      s.queues.back().push_back(id++);
    }
  }
  return s;
}

}  // namespace

TEST(Strategy, KindNamesRoundTrip) {
  for (auto k : {StrategyKind::virtual_ga, StrategyKind::segmented_ga, StrategyKind::wrr, StrategyKind::wlc})
    EXPECT_EQ(parse_strategy_kind(to_string(k)), k);
  EXPECT_THROW(parse_strategy_kind("fifo"), Error);
  EXPECT_THROW((Strategy{StrategyKind::wrr, {}, {1, 0}}).validate(), Error);
}

TEST(DispatchWrr, Examples) {
  EXPECT_EQ(wrr_sequence({1, 1, 1}, 6), (std::vector<std::size_t>{0, 1, 2, 0, 1, 2}));
  EXPECT_EQ(wrr_sequence({2, 1}, 6), (std::vector<std::size_t>{0, 0, 1, 0, 0, 1}));
  EXPECT_EQ(wrr_sequence({1}, 4), (std::vector<std::size_t>{0, 0, 0, 0}));
  EXPECT_EQ(wrr_sequence({4, 3, 2}, 9), (std::vector<std::size_t>{0, 0, 1, 0, 1, 2, 0, 1, 2}));
}

TEST(DispatchWrr, SnapshotOverloadUsesEqualWeightsByDefault) {
  const auto s = with_lengths({5, 0, 2});
  WrrCursor cursor;
  std::vector<std::size_t> got;
  for (int i = 0; i < 4; ++i) {
    auto [k, next] = dispatch_wrr(s, {}, cursor);
    got.push_back(k);
    cursor = next;
  }
  EXPECT_EQ(got, (std::vector<std::size_t>{0, 1, 2, 0}));
  EXPECT_THROW(dispatch_wrr(s, std::vector<std::uint32_t>{1, 2}, WrrCursor{}), Error);
}

TEST(DispatchWrr, EachCycleMatchesWeights) {
  std::mt19937_64 gen(6);
  std::uniform_int_distribution<std::uint32_t> w(1, 6);
  for (int c = 0; c < 100; ++c) {
    std::vector<std::uint32_t> weights(1 + c % 5);
    std::uint32_t total = 0;
    for (auto& x : weights) total += (x = w(gen));
    const auto seq = wrr_sequence(weights, 3 * total);
    for (int cycle = 0; cycle < 3; ++cycle) {
      std::vector<std::uint32_t> count(weights.size(), 0);
      for (std::uint32_t i = 0; i < total; ++i) ++count[seq[cycle * total + i]];
      // A full cycle is W / gcd jobs long, so W jobs always span whole cycles.
      EXPECT_EQ(count, weights);
    }
  }
}

TEST(DispatchWlc, Examples) {
  EXPECT_EQ(dispatch_wlc(with_lengths({3, 1, 2}), {}), 1u);
  EXPECT_EQ(dispatch_wlc(with_lengths({2, 2, 2}), {}), 0u);
  EXPECT_EQ(dispatch_wlc(with_lengths({4, 2}), std::vector<std::uint32_t>{2, 1}), 0u);
}

TEST(DispatchWlc, CountsTheJobInService) {
  auto s = with_lengths({1, 1, 2});
  s.busy_until = {0.5, 0.0, 0.0};
  EXPECT_EQ(connection_counts(s), (std::vector<std::size_t>{2, 1, 2}));
  EXPECT_EQ(dispatch_wlc(s, {}), 1u);
}

TEST(DispatchWlc, NeverPicksALongerQueue) {
  std::mt19937_64 gen(10);
  std::uniform_int_distribution<std::size_t> len(0, 9);
  std::uniform_int_distribution<std::uint32_t> w(1, 5);
  for (int c = 0; c < 500; ++c) {
    std::vector<std::size_t> conn(1 + c % 6);
    std::vector<std::uint32_t> weights(conn.size());
    for (auto& x : conn) x = len(gen);
    for (auto& x : weights) x = w(gen);
    const auto k = dispatch_wlc(conn, weights);
    for (std::size_t q = 0; q < conn.size(); ++q) {
      const double mine = static_cast<double>(conn[k]) / weights[k], other = static_cast<double>(conn[q]) / weights[q];
      EXPECT_LE(mine, other + 1e-12);
      if (q < k) {
        EXPECT_GT(other, mine) << "tie should go to the lower index";
      }
    }
  }
}

TEST(DispatchWlc, Errors) {
  EXPECT_THROW(dispatch_wlc(std::vector<std::size_t>{}, std::vector<std::uint32_t>{}), Error);
  EXPECT_THROW(dispatch_wlc(std::vector<std::size_t>{1, 2}, std::vector<std::uint32_t>{1}), Error);
}

TEST(SegmentedGa, ShortQueuesCannotImprove) {
  TierSnapshot s;
  s.queues = {{1}, {}, {2}};
  s.exec_of = {{1, 3.0}, {2, 1.0}};
  s.busy_until = {0.75, 2.0, 1.5};
  const auto run = run_segmented_ga(s, GaConfig{10, 50, 0.1, 1});
  EXPECT_DOUBLE_EQ(run.best_fitness, 0.75 + 1.5);
  EXPECT_EQ(run.best_order, to_virtual_queue(s));
  for (const auto& p : run.trace) EXPECT_DOUBLE_EQ(p.best_fitness, 2.25);
}

TEST(SegmentedGa, SingleQueueShortestFirst) {
  TierSnapshot s;
  s.queues = {{1, 2, 3}};
  s.exec_of = {{1, 5.0}, {2, 3.0}, {3, 2.0}};
  s.busy_until = {0.0};
  const auto run = run_segmented_ga(s, GaConfig{10, 200, 0.1, 1});
  EXPECT_DOUBLE_EQ(run.best_fitness, 7.0);
  EXPECT_EQ(run.best_order.order, (std::vector<JobId>{3, 2, 1}));
}

TEST(SegmentedGa, JobsStayInTheirQueue) {
  const auto s = load_fixture(std::filesystem::path(TIERSCHED_FIXTURE_DIR) / "queues_14_16_15.txt");
  const auto run = run_segmented_ga(s, GaConfig{10, 100, 0.1, 5});
  const auto applied = apply_schedule(s, run.best_order);
  for (std::size_t k = 0; k < s.num_queues(); ++k) {
    auto a = s.queues[k], b = applied.queues[k];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
  EXPECT_NEAR(fitness(s, run.best_order), run.best_fitness, 1e-9);
  for (std::size_t g = 1; g < run.trace.size(); ++g) EXPECT_LE(run.trace[g].best_fitness, run.trace[g - 1].best_fitness);
}

TEST(SegmentedGa, QueueFixtureInitialValues) {
  std::size_t row = 0;
  for (const char* name : {"queues_14_16_15.txt", "queues_19_23_14.txt"}) {
    const auto s = load_fixture(std::filesystem::path(TIERSCHED_FIXTURE_DIR) / name);
    for (std::size_t k = 0; k < s.num_queues(); ++k, ++row) {
      const auto& ref = test::kQueueRows[row];
      EXPECT_EQ(s.queues[k].size(), static_cast<std::size_t>(ref.jobs));
      TierSnapshot single;
      single.queues = {s.queues[k]};
      single.busy_until = {0.0};
      for (auto id : s.queues[k]) single.exec_of[id] = s.exec_of.at(id);
      EXPECT_NEAR(fitness(single, to_virtual_queue(single)), ref.initial_waiting, 5e-9);
    }
  }
}

TEST(Dominance, VirtualOptimumNeverWorse) {
  std::mt19937_64 gen(31);
  for (int c = 0; c < 30; ++c) {
    const auto s = test::random_snapshot(gen, {2, 7, 2 + static_cast<std::size_t>(c % 2), c % 2 == 1});
    const double virt = test::brute_force_virtual(s), seg = test::brute_force_segmented(s);
    EXPECT_LE(virt, seg + 1e-9);
    const GaConfig cfg{10, 300, 0.1, static_cast<std::uint64_t>(c)};
    EXPECT_GE(run_ga(s, cfg).best_fitness, virt - 1e-9);
    EXPECT_GE(run_segmented_ga(s, cfg).best_fitness, seg - 1e-9);
  }
}
