#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tiersched/ga.hpp"
#include "tiersched/model.hpp"
#include "tiersched/policies.hpp"
#include "tiersched/rng.hpp"
#include "tiersched/sim.hpp"
#include "tiersched/workload.hpp"

namespace tiersched {

/// Everything a stochastic comparison needs. Per-replication seeds are derived
/// from `seed`, so the workload and GA seeds inside the members are ignored.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  Environment environment;
  PenaltyModel penalty;
  WorkloadConfig workload;
  GaConfig ga;
  std::size_t reoptimize_every = 5;
  std::size_t initial_epoch_after = 0;
  std::vector<Strategy> strategies = {{StrategyKind::virtual_ga, {}, {}},
                                      {StrategyKind::segmented_ga, {}, {}},
                                      {StrategyKind::wlc, {}, {}},
                                      {StrategyKind::wrr, {}, {}}};
  std::size_t replications = 1;

  void validate() const {
    environment.validate();
    penalty.validate();
    workload.validate();
    ga.validate();
    if (workload.num_tiers() != environment.num_tiers)
      throw Error("experiment: workload needs one service rate per tier (" + std::to_string(environment.num_tiers) +
                  ")");
    if (strategies.empty()) throw Error("experiment: at least one strategy is required");
    if (replications == 0) throw Error("experiment: replications must be >= 1");
    for (const auto& c : sim_configs(0)) c.validate();
  }

  std::uint64_t replication_seed(std::size_t r) const { return seed + r; }

  WorkloadConfig workload_for(std::size_t r) const {
    WorkloadConfig w = workload;
    w.seed = replication_seed(r);
    return w;
  }

  std::vector<SimConfig> sim_configs(std::size_t r) const {
    std::vector<SimConfig> out;
    for (const auto& s : strategies) {
      SimConfig c;
      c.environment = environment;
      c.penalty = penalty;
      c.strategy = s;
      c.strategy.ga = ga;
      c.strategy.ga.seed = replication_seed(r);
      c.reoptimize_every = reoptimize_every;
      c.initial_epoch_after = initial_epoch_after;
      out.push_back(std::move(c));
    }
    return out;
  }

  bool operator==(const ExperimentConfig&) const = default;
};

inline ExperimentReport run_replication(const ExperimentConfig& config, std::size_t r) {
  return compare_strategies(generate(config.workload_for(r)), config.sim_configs(r));
}

struct SampleStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single value
};

inline SampleStats sample_stats(std::span<const double> xs) {
  if (xs.empty()) throw Error("sample_stats: no values");
  SampleStats s;
  for (auto x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (auto x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

/// One-sided paired bootstrap: the share of resampled mean differences that
/// are <= 0. A gap is positive at level a when the result is below 1 - a.
inline double paired_bootstrap_p(std::span<const double> diffs, std::size_t resamples = 10000,
                                 std::uint64_t seed = 1) {
  if (diffs.empty()) throw Error("paired_bootstrap_p: no differences");
  if (resamples == 0) throw Error("paired_bootstrap_p: resamples must be >= 1");
  Rng rng(seed);
  std::size_t not_positive = 0;
  for (std::size_t b = 0; b < resamples; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i) sum += diffs[rng.below(diffs.size())];
    if (sum <= 0.0) ++not_positive;
  }
  return static_cast<double>(not_positive) / static_cast<double>(resamples);
}

struct GapVerdict {
  std::string lower;   // strategy expected to wait less
  std::string higher;
  double mean_gap = 0.0;
  double p_value = 0.0;
  bool positive = false;
};

struct ComparisonOutcome {
  std::vector<std::string> strategies;
  std::vector<std::vector<SimTotals>> totals;  // [replication][strategy]
  std::vector<SampleStats> total_waiting, mean_wait, max_wait;  // per strategy
  std::vector<GapVerdict> gaps;  // consecutive strategies in configured order
  bool ordered = false;          // every gap positive

  std::vector<double> waiting_of(std::size_t strategy) const {
    std::vector<double> v;
    for (const auto& rep : totals) v.push_back(rep[strategy].total_waiting);
    return v;
  }
};

/// Runs every replication and checks that the configured strategy list is
/// strictly increasing in total waiting, each step at a one-sided bootstrap
/// level `confidence`.
inline ComparisonOutcome run_comparison(const ExperimentConfig& config, double confidence = 0.95,
                                        std::size_t resamples = 10000) {
  config.validate();
  ComparisonOutcome out;
  for (std::size_t r = 0; r < config.replications; ++r) {
    auto report = run_replication(config, r);
    if (out.strategies.empty())
      for (const auto& row : report.rows) out.strategies.push_back(row.strategy);
    std::vector<SimTotals> row;
    for (const auto& s : report.rows) row.push_back(s.totals);
    out.totals.push_back(std::move(row));
  }
  const std::size_t k = out.strategies.size();
  for (std::size_t s = 0; s < k; ++s) {
    std::vector<double> w, mean, max;
    for (const auto& rep : out.totals) {
      w.push_back(rep[s].total_waiting);
      mean.push_back(rep[s].mean_wait);
      max.push_back(rep[s].max_wait);
    }
    out.total_waiting.push_back(sample_stats(w));
    out.mean_wait.push_back(sample_stats(mean));
    out.max_wait.push_back(sample_stats(max));
  }
  out.ordered = k > 1;
  for (std::size_t s = 0; s + 1 < k; ++s) {
    std::vector<double> d;
    for (const auto& rep : out.totals) d.push_back(rep[s + 1].total_waiting - rep[s].total_waiting);
    GapVerdict g;
    g.lower = out.strategies[s];
    g.higher = out.strategies[s + 1];
    g.mean_gap = sample_stats(d).mean;
    g.p_value = paired_bootstrap_p(d, resamples, mix_seed(config.seed, s));
    g.positive = g.mean_gap > 0.0 && g.p_value < 1.0 - confidence;
    out.ordered = out.ordered && g.positive;
    out.gaps.push_back(std::move(g));
  }
  return out;
}

// Static before/after rows for the committed snapshot fixtures.

struct TableRow {
  std::string instance;
  std::size_t jobs = 0;
  Duration initial_waiting = 0.0;
  double initial_penalty = 0.0;
  Duration enhanced_waiting = 0.0;
  double enhanced_penalty = 0.0;
  double waiting_improvement_pct = 0.0;
  double penalty_improvement_pct = 0.0;
};

/// Generations used for a snapshot of `jobs` waiting jobs.
inline std::size_t default_generations(std::size_t jobs) { return jobs <= 19 ? 500 : 1000; }

inline TableRow make_row(std::string instance, std::size_t jobs, Duration initial, Duration enhanced,
                         const PenaltyModel& penalty) {
  TableRow row;
  row.instance = std::move(instance);
  row.jobs = jobs;
  row.initial_waiting = initial;
  row.enhanced_waiting = enhanced;
  row.initial_penalty = aggregate_penalty(penalty, initial);
  row.enhanced_penalty = aggregate_penalty(penalty, enhanced);
  row.waiting_improvement_pct = improvement_pct(initial, enhanced);
  row.penalty_improvement_pct = improvement_pct(row.initial_penalty, row.enhanced_penalty);
  return row;
}

inline const std::vector<std::string>& tier_fixture_names() {
  static const std::vector<std::string> names = {"tier_12jobs", "tier_15jobs", "tier_19jobs",
                                                 "tier_31jobs", "tier_32jobs", "tier_27jobs"};
  return names;
}

inline const std::vector<std::string>& queue_fixture_names() {
  static const std::vector<std::string> names = {"queues_14_16_15", "queues_19_23_14"};
  return names;
}

/// Virtual-queue GA on each whole-tier fixture.
inline std::vector<TableRow> tier_table(const std::filesystem::path& fixture_dir, std::uint64_t seed,
                                        const PenaltyModel& penalty = {}) {
  std::vector<TableRow> rows;
  for (const auto& name : tier_fixture_names()) {
    const auto snap = load_fixture(fixture_dir / (name + ".txt"));
    GaConfig ga;
    ga.seed = seed;
    ga.max_generations = default_generations(snap.job_count());
    const auto run = run_ga(snap, ga);
    rows.push_back(make_row(name, snap.job_count(), fitness(snap, to_virtual_queue(snap)), run.best_fitness, penalty));
  }
  return rows;
}

/// GA on each resource queue of the per-queue fixtures, one row per queue.
inline std::vector<TableRow> queue_table(const std::filesystem::path& fixture_dir, std::uint64_t seed,
                                         const PenaltyModel& penalty = {}) {
  std::vector<TableRow> rows;
  for (const auto& name : queue_fixture_names()) {
    const auto snap = load_fixture(fixture_dir / (name + ".txt"));
    for (std::size_t k = 0; k < snap.num_queues(); ++k) {
      TierSnapshot single;
      single.tier_index = snap.tier_index;
      single.queues = {snap.queues[k]};
      single.busy_until = {snap.busy_until[k]};
      for (auto id : snap.queues[k]) single.exec_of[id] = snap.exec_of.at(id);
      GaConfig ga;
      ga.seed = mix_seed(seed, k);
      ga.max_generations = default_generations(single.job_count());
      const auto run = run_ga(single, ga);
      rows.push_back(make_row(name + "/resource_" + std::to_string(k + 1), single.job_count(),
                              fitness(single, to_virtual_queue(single)), run.best_fitness, penalty));
    }
  }
  return rows;
}

}  // namespace tiersched
