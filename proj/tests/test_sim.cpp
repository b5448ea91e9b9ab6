#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "tiersched/sim.hpp"
#include "tiersched/workload.hpp"

using namespace tiersched;

namespace {

Job make_job(JobId id, double arrival, std::vector<double> exec) {
  Job j;
  j.id = id;
  j.exec_times = std::move(exec);
  j.arrivals.assign(j.exec_times.size(), 0.0);
  j.arrivals[0] = arrival;
  return j;
}

SimConfig config_for(StrategyKind kind, std::vector<std::size_t> resources) {
  SimConfig c;
  c.environment = {resources.size(), resources};
  c.strategy.kind = kind;
  return c;
}

std::vector<Job> workload(double lambda, std::size_t n, std::size_t tiers, std::uint64_t seed) {
  WorkloadConfig w;
  w.arrival_rate = lambda;
  w.num_jobs = n;
  w.service_rates.assign(tiers, 1.0);
  w.seed = seed;
  return generate(w);
}

// Checks that hold for every run regardless of strategy.
void check_invariants(const std::vector<Job>& input, const SimResult& r, const SimConfig& c) {
  ASSERT_EQ(r.jobs.size(), input.size());
  const std::size_t tiers = c.environment.num_tiers;
  double sum_w = 0.0, sum_p = 0.0, max_w = 0.0;
  std::set<JobId> ids;
  for (std::size_t i = 0; i < r.jobs.size(); ++i) {
    const auto& rec = r.jobs[i];
    EXPECT_EQ(rec.job.id, input[i].id);
    EXPECT_TRUE(ids.insert(rec.job.id).second);
    EXPECT_EQ(rec.job.arrivals[0], input[i].arrivals[0]);
    double w = 0.0;
    for (std::size_t j = 0; j < tiers; ++j) {
      ASSERT_TRUE(rec.job.waits[j].has_value());
      ASSERT_TRUE(rec.job.departures[j].has_value());
      EXPECT_GE(*rec.job.waits[j], 0.0);
      EXPECT_NEAR(*rec.job.departures[j], rec.job.arrivals[j] + *rec.job.waits[j] + rec.job.exec_times[j], 1e-9);
      if (j + 1 < tiers) {
        EXPECT_EQ(rec.job.arrivals[j + 1], *rec.job.departures[j]);
      }
      EXPECT_LT(rec.resources[j], c.environment.resources_per_tier[j]);
      w += *rec.job.waits[j];
    }
    EXPECT_NEAR(rec.total_wait, w, 1e-9);
    double e = 0.0;
    for (auto x : rec.job.exec_times) e += x;
    EXPECT_NEAR(rec.response, e + w, 1e-9);
    EXPECT_NEAR(rec.penalty, test::penalty_formula(w, c.penalty.chi, c.penalty.nu), 1e-12);
    sum_w += rec.total_wait;
    sum_p += rec.penalty;
    max_w = std::max(max_w, rec.total_wait);
  }
  EXPECT_NEAR(r.totals.total_waiting, sum_w, 1e-6);
  EXPECT_NEAR(r.totals.total_penalty_sum, sum_p, 1e-9);
  EXPECT_EQ(r.totals.max_wait, max_w);
  EXPECT_EQ(r.totals.jobs, input.size());

  // No two jobs overlap on a resource, and a resource only sits idle until the
  // next job arrives or a GA epoch moves one into its queue.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> served;
  for (std::size_t i = 0; i < r.jobs.size(); ++i)
    for (std::size_t j = 0; j < tiers; ++j) served[{j, r.jobs[i].resources[j]}].push_back(i);
  std::set<std::pair<std::size_t, double>> epoch_times;
  for (const auto& e : r.epochs) epoch_times.insert({e.tier, e.time});
  for (auto& [key, list] : served) {
    const auto tier = key.first;
    std::sort(list.begin(), list.end(),
              [&](auto a, auto b) { return r.jobs[a].service_starts[tier] < r.jobs[b].service_starts[tier]; });
    double free_at = 0.0;
    for (auto i : list) {
      const double start = r.jobs[i].service_starts[tier];
      const double arrive = r.jobs[i].job.arrivals[tier];
      EXPECT_GE(start, free_at - 1e-12);
      if (start > free_at && start > arrive) {
        EXPECT_TRUE(epoch_times.count({tier, start})) << "resource idle while job " << i << " waited";
      }
      free_at = *r.jobs[i].job.departures[tier];
    }
  }
}

}  // namespace

TEST(RunSim, SingleJobNoContention) {
  const std::vector<Job> jobs = {make_job(0, 1.5, {2.0, 3.0})};
  for (auto kind : {StrategyKind::wrr, StrategyKind::wlc, StrategyKind::virtual_ga, StrategyKind::segmented_ga}) {
    const auto r = run_sim(jobs, config_for(kind, {3, 3}));
    EXPECT_EQ(r.jobs[0].total_wait, 0.0);
    EXPECT_EQ(r.jobs[0].response, 5.0);
    EXPECT_EQ(*r.jobs[0].job.departures[1], 6.5);
    EXPECT_EQ(r.totals.total_penalty_sum, 0.0);
  }
}

TEST(RunSim, SimultaneousArrivalsOnOneResource) {
  const std::vector<Job> jobs = {make_job(0, 1.0, {2.0}), make_job(1, 1.0, {2.0})};
  const auto r = run_sim(jobs, config_for(StrategyKind::wlc, {1}));
  EXPECT_EQ(*r.jobs[0].job.waits[0], 0.0);
  EXPECT_EQ(*r.jobs[1].job.waits[0], 2.0);
  EXPECT_EQ(*r.jobs[1].job.departures[0], 5.0);
}

TEST(RunSim, SingleServerMatchesLindley) {
  const auto jobs = workload(0.8, 3000, 1, 21);
  std::vector<double> a, s;
  for (const auto& j : jobs) {
    a.push_back(j.arrivals[0]);
    s.push_back(j.exec_times[0]);
  }
  const auto expect = test::lindley_waits(a, s);
  for (auto kind : {StrategyKind::wrr, StrategyKind::wlc}) {
    const auto r = run_sim(jobs, config_for(kind, {1}));
    for (std::size_t i = 0; i < jobs.size(); ++i) EXPECT_NEAR(*r.jobs[i].job.waits[0], expect[i], 1e-9);
  }
}

TEST(RunSim, RoundRobinLineMatchesOracle) {
  const auto jobs = workload(2.6, 400, 2, 8);
  std::vector<double> first;
  std::vector<std::vector<double>> exec;
  for (const auto& j : jobs) {
    first.push_back(j.arrivals[0]);
    exec.push_back(j.exec_times);
  }
  const auto expect = test::round_robin_line(first, exec, {3, 3});
  const auto r = run_sim(jobs, config_for(StrategyKind::wrr, {3, 3}));
  for (std::size_t i = 0; i < jobs.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(*r.jobs[i].job.waits[j], expect.waits[i][j], 1e-9) << "job " << i << " tier " << j;
      EXPECT_EQ(r.jobs[i].resources[j], expect.resource[i][j]);
    }
}

TEST(RunSim, MM1MeanWait) {
  const auto jobs = workload(0.5, 50000, 1, 5);
  const auto r = run_sim(jobs, config_for(StrategyKind::wlc, {1}));
  EXPECT_NEAR(r.totals.mean_wait, 1.0, 0.15);
}

TEST(RunSim, InvariantsForEveryStrategy) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto jobs = workload(2.7, 150, 2, seed);
    for (auto kind : {StrategyKind::wrr, StrategyKind::wlc, StrategyKind::virtual_ga, StrategyKind::segmented_ga}) {
      auto c = config_for(kind, {3, 3});
      c.strategy.ga.max_generations = 60;
      c.reoptimize_every = 1 + seed % 3;
      check_invariants(jobs, run_sim(jobs, c), c);
    }
  }
}

TEST(RunSim, UnevenTiersAndWeights) {
  const auto jobs = workload(1.5, 200, 3, 12);
  auto c = config_for(StrategyKind::wlc, {2, 4, 1});
  check_invariants(jobs, run_sim(jobs, c), c);
  c = config_for(StrategyKind::wrr, {2, 2, 2});
  c.strategy.weights = {3, 1};
  check_invariants(jobs, run_sim(jobs, c), c);
  c.strategy.weights = {3, 1, 1};
  EXPECT_THROW(run_sim(jobs, c), Error);
}

TEST(RunSim, Deterministic) {
  const auto jobs = workload(2.7, 120, 2, 3);
  auto c = config_for(StrategyKind::virtual_ga, {3, 3});
  c.strategy.ga.max_generations = 80;
  const auto a = run_sim(jobs, c), b = run_sim(jobs, c);
  EXPECT_EQ(a.totals, b.totals);
  for (std::size_t i = 0; i < a.jobs.size(); ++i) EXPECT_EQ(a.jobs[i].service_starts, b.jobs[i].service_starts);
}

TEST(RunSim, SingleEpochAgreesWithEvaluator) {
  const auto jobs = workload(6.0, 60, 1, 17);
  for (auto kind : {StrategyKind::virtual_ga, StrategyKind::segmented_ga}) {
    auto c = config_for(kind, {3});
    c.reoptimize_every = kNeverReoptimize;
    c.initial_epoch_after = 30;
    const auto r = run_sim(jobs, c);
    ASSERT_EQ(r.epochs.size(), 1u);
    const auto& e = r.epochs[0];
    ASSERT_GT(e.jobs, 5u);
    std::map<JobId, std::size_t> index;
    for (std::size_t i = 0; i < r.jobs.size(); ++i) index[r.jobs[i].job.id] = i;
    double simulated = 0.0;
    for (auto id : e.schedule.order) simulated += r.jobs[index.at(id)].service_starts[0] - e.time;
    EXPECT_NEAR(simulated, e.trace.back().best_fitness, 1e-9);
    EXPECT_LE(e.trace.back().best_fitness, e.initial_fitness);
  }
}

TEST(RunSim, RejectsBadInput) {
  auto c = config_for(StrategyKind::wlc, {1, 1});
  EXPECT_THROW(run_sim({make_job(0, 2.0, {1, 1}), make_job(1, 1.0, {1, 1})}, c), Error);
  EXPECT_THROW(run_sim({make_job(0, 1.0, {1})}, c), Error);
  EXPECT_THROW(run_sim({make_job(0, 1.0, {1, 0})}, c), Error);
  EXPECT_THROW(run_sim({make_job(0, 1.0, {1, 1}), make_job(0, 2.0, {1, 1})}, c), Error);
  c.reoptimize_every = 0;
  EXPECT_THROW(run_sim({make_job(0, 1.0, {1, 1})}, c), Error);
}

TEST(CompareStrategies, SingleAndDuplicate) {
  const auto jobs = workload(2.7, 100, 2, 9);
  const auto wlc = config_for(StrategyKind::wlc, {3, 3});
  const auto one = compare_strategies(jobs, {wlc});
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_EQ(one.rows[0].totals, run_sim(jobs, wlc).totals);
  EXPECT_EQ(one.rows[0].waiting_improvement_pct, 0.0);

  const auto twice = compare_strategies(jobs, {wlc, wlc});
  EXPECT_EQ(twice.rows[0].totals, twice.rows[1].totals);
  EXPECT_EQ(twice.rows[0].strategy, twice.rows[1].strategy);
}

TEST(CompareStrategies, ImprovementRelativeToFirst) {
  const auto jobs = workload(2.7, 200, 2, 4);
  const auto rep =
      compare_strategies(jobs, {config_for(StrategyKind::wrr, {3, 3}), config_for(StrategyKind::wlc, {3, 3})});
  const double w0 = rep.rows[0].totals.total_waiting, w1 = rep.rows[1].totals.total_waiting;
  EXPECT_LE(w1, w0);
  EXPECT_NEAR(rep.rows[1].waiting_improvement_pct, (w0 - w1) / w0 * 100.0, 1e-9);
}

TEST(CompareStrategies, RejectsMismatchedEnvironments) {
  const auto jobs = workload(1.0, 10, 2, 1);
  auto other = config_for(StrategyKind::wlc, {3, 2});
  EXPECT_THROW(compare_strategies(jobs, {config_for(StrategyKind::wlc, {3, 3}), other}), Error);
  auto pen = config_for(StrategyKind::wlc, {3, 3});
  pen.penalty.nu = 0.02;
  EXPECT_THROW(compare_strategies(jobs, {config_for(StrategyKind::wlc, {3, 3}), pen}), Error);
  EXPECT_THROW(compare_strategies(jobs, {}), Error);
}
