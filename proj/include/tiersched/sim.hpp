#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tiersched/ga.hpp"
#include "tiersched/model.hpp"
#include "tiersched/policies.hpp"

namespace tiersched {

/// reoptimize_every value that disables periodic GA epochs after the first.
inline constexpr std::size_t kNeverReoptimize = std::numeric_limits<std::size_t>::max();

struct SimConfig {
  Environment environment;
  Strategy strategy;
  PenaltyModel penalty;
  // Arrivals at a tier between two GA epochs on that tier (GA strategies only).
  std::size_t reoptimize_every = 5;
  // With kNeverReoptimize, a single epoch still runs after this many arrivals
  // at each tier; 0 disables it.
  std::size_t initial_epoch_after = 0;
  std::string label;  // defaults to the strategy kind

  std::string name() const { return label.empty() ? std::string(to_string(strategy.kind)) : label; }

  void validate() const {
    environment.validate();
    strategy.validate();
    penalty.validate();
    if (reoptimize_every == 0) throw Error("sim: reoptimize_every must be positive");
    if (!strategy.weights.empty())
      for (auto m : environment.resources_per_tier)
        if (m != strategy.weights.size())
          throw Error("sim: strategy weights must have one entry per resource of every tier");
  }
};

struct JobRecord {
  Job job;                                // waits, arrivals and departures filled in
  std::vector<double> service_starts;     // per tier
  std::vector<std::size_t> resources;     // resource that served the job, per tier
  Duration total_wait = 0.0;              // W_i
  Duration response = 0.0;                // Z_i
  double penalty = 0.0;                   // rho_i
};

struct SimTotals {
  std::size_t jobs = 0;
  Duration total_waiting = 0.0;
  double total_penalty_sum = 0.0;        // sum of per-job penalties
  double total_penalty_aggregate = 0.0;  // penalty of the summed waiting
  Duration mean_wait = 0.0;
  Duration max_wait = 0.0;

  bool operator==(const SimTotals&) const = default;
};

struct EpochTrace {
  std::size_t tier = 0;
  std::size_t epoch = 0;
  double time = 0.0;
  std::size_t jobs = 0;
  Duration initial_fitness = 0.0;
  VirtualQueue schedule;
  std::vector<TracePoint> trace;
};

struct SimResult {
  std::string strategy;
  std::vector<JobRecord> jobs;  // in job-id order of the input
  SimTotals totals;
  std::vector<EpochTrace> epochs;
};

namespace detail {

enum class EventKind : std::uint8_t { service_complete = 0, arrival = 1, reoptimize = 2 };

struct Event {
  double time;
  EventKind kind;
  std::uint64_t key;  // job id, or tier for reoptimize
  std::size_t tier;
  std::size_t resource;
  std::uint64_t seq;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.key != b.key) return a.key > b.key;
    return a.seq > b.seq;
  }
};

struct Resource {
  std::deque<JobId> queue;
  std::optional<JobId> serving;
  double busy_end = 0.0;
};

}  // namespace detail

inline SimTotals summarize(const std::vector<JobRecord>& records, const PenaltyModel& penalty) {
  SimTotals t;
  t.jobs = records.size();
  for (const auto& r : records) {
    t.total_waiting += r.total_wait;
    t.total_penalty_sum += r.penalty;
    t.max_wait = std::max(t.max_wait, r.total_wait);
  }
  t.total_penalty_aggregate = aggregate_penalty(penalty, t.total_waiting);
  t.mean_wait = records.empty() ? 0.0 : t.total_waiting / static_cast<double>(records.size());
  return t;
}

/// Event-driven simulation of the tier pipeline. Service is non-preemptive;
/// a job finishing tier j joins tier j+1 at the same instant. WRR/WLC dispatch
/// arrivals and serve FIFO; GA strategies send arrivals to the queue with the
/// fewest connections and periodically reorder the waiting jobs of a tier.
inline SimResult run_sim(const std::vector<Job>& jobs, const SimConfig& config) {
  config.validate();
  const auto& env = config.environment;
  const std::size_t tiers = env.num_tiers;
  const auto& strategy = config.strategy;

  std::unordered_map<JobId, std::size_t> index_of;
  SimResult result;
  result.strategy = config.name();
  result.jobs.resize(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& job = jobs[i];
    if (job.exec_times.size() != tiers)
      throw Error("sim: job " + std::to_string(job.id) + " has " + std::to_string(job.exec_times.size()) +
                  " execution times for " + std::to_string(tiers) + " tiers");
    for (auto e : job.exec_times)
      if (!(e > 0.0)) throw Error("sim: execution times must be positive");
    if (job.arrivals.empty()) throw Error("sim: job " + std::to_string(job.id) + " has no arrival time");
    if (i > 0 && job.arrivals[0] < jobs[i - 1].arrivals[0]) throw Error("sim: jobs must be sorted by arrival");
    if (!index_of.emplace(job.id, i).second) throw Error("sim: duplicate job id " + std::to_string(job.id));
    auto& rec = result.jobs[i];
    rec.job = job;
    rec.job.arrivals.assign(tiers, 0.0);
    rec.job.arrivals[0] = job.arrivals[0];
    rec.job.departures.assign(tiers, std::nullopt);
    rec.job.waits.assign(tiers, std::nullopt);
    rec.service_starts.assign(tiers, 0.0);
    rec.resources.assign(tiers, 0);
  }

  std::vector<std::vector<detail::Resource>> resources(tiers);
  for (std::size_t j = 0; j < tiers; ++j) resources[j].resize(env.resources_per_tier[j]);
  std::vector<WrrCursor> cursors(tiers);
  std::vector<std::size_t> arrivals_at(tiers, 0), epochs_at(tiers, 0);
  std::vector<std::vector<std::uint32_t>> weights(tiers);
  for (std::size_t j = 0; j < tiers; ++j) weights[j] = effective_weights(strategy.weights, env.resources_per_tier[j]);

  std::priority_queue<detail::Event, std::vector<detail::Event>, detail::EventAfter> events;
  std::uint64_t seq = 0;
  auto push = [&](double t, detail::EventKind kind, std::uint64_t key, std::size_t tier, std::size_t res) {
    events.push(detail::Event{t, kind, key, tier, res, seq++});
  };
  for (const auto& job : jobs) push(job.arrivals[0], detail::EventKind::arrival, job.id, 0, 0);

  double now = 0.0;
  auto start_next = [&](std::size_t tier, std::size_t k) {
    auto& r = resources[tier][k];
    if (r.serving || r.queue.empty()) return;
    const JobId id = r.queue.front();
    r.queue.pop_front();
    auto& rec = result.jobs[index_of.at(id)];
    rec.job.waits[tier] = now - rec.job.arrivals[tier];
    rec.service_starts[tier] = now;
    rec.resources[tier] = k;
    r.serving = id;
    r.busy_end = now + rec.job.exec_times[tier];
    push(r.busy_end, detail::EventKind::service_complete, id, tier, k);
  };

  auto reoptimize = [&](std::size_t tier) {
    auto& tier_res = resources[tier];
    TierSnapshot snap;
    snap.tier_index = tier;
    for (auto& r : tier_res) {
      snap.queues.emplace_back(r.queue.begin(), r.queue.end());
      snap.busy_until.push_back(r.serving ? std::max(0.0, r.busy_end - now) : 0.0);
      for (auto id : r.queue) snap.exec_of[id] = result.jobs[index_of.at(id)].job.exec_times[tier];
    }
    const std::size_t epoch = epochs_at[tier]++;
    if (snap.job_count() == 0) return;
    GaConfig ga = strategy.ga;
    ga.seed = mix_seed(mix_seed(strategy.ga.seed, tier), epoch);
    const GaRun run =
        strategy.kind == StrategyKind::virtual_ga ? run_ga(snap, ga) : run_segmented_ga(snap, ga);
    const auto applied = apply_schedule(snap, run.best_order);
    for (std::size_t k = 0; k < tier_res.size(); ++k)
      tier_res[k].queue.assign(applied.queues[k].begin(), applied.queues[k].end());
    result.epochs.push_back(
        EpochTrace{tier, epoch, now, snap.job_count(), fitness(snap, to_virtual_queue(snap)), run.best_order, run.trace});
    for (std::size_t k = 0; k < tier_res.size(); ++k) start_next(tier, k);
  };

  std::size_t departed = 0;
  std::vector<std::size_t> connections;
  while (!events.empty()) {
    const auto ev = events.top();
    events.pop();
    if (ev.time < now) throw std::logic_error("sim: event queue went back in time");
    now = ev.time;
    switch (ev.kind) {
      case detail::EventKind::arrival: {
        const auto id = static_cast<JobId>(ev.key);
        auto& rec = result.jobs[index_of.at(id)];
        rec.job.arrivals[ev.tier] = now;
        auto& tier_res = resources[ev.tier];
        std::size_t k = 0;
        if (strategy.kind == StrategyKind::wrr) {
          auto [choice, cursor] = dispatch_wrr(weights[ev.tier], cursors[ev.tier]);
          k = choice;
          cursors[ev.tier] = cursor;
        } else {
          connections.resize(tier_res.size());
          for (std::size_t q = 0; q < tier_res.size(); ++q)
            connections[q] = tier_res[q].queue.size() + (tier_res[q].serving ? 1 : 0);
          k = dispatch_wlc(connections, weights[ev.tier]);
        }
        tier_res[k].queue.push_back(id);
        start_next(ev.tier, k);
        const auto count = ++arrivals_at[ev.tier];
        if (strategy.is_ga()) {
          const bool periodic = config.reoptimize_every != kNeverReoptimize && count % config.reoptimize_every == 0;
          const bool initial = config.initial_epoch_after != 0 && count == config.initial_epoch_after;
          if (periodic || initial) push(now, detail::EventKind::reoptimize, ev.tier, ev.tier, 0);
        }
        break;
      }
      case detail::EventKind::service_complete: {
        auto& r = resources[ev.tier][ev.resource];
        const auto id = static_cast<JobId>(ev.key);
        if (!r.serving || *r.serving != id) throw std::logic_error("sim: completion for a job not in service");
        r.serving.reset();
        auto& rec = result.jobs[index_of.at(id)];
        rec.job.departures[ev.tier] = now;
        if (ev.tier + 1 < tiers)
          push(now, detail::EventKind::arrival, id, ev.tier + 1, 0);
        else
          ++departed;
        start_next(ev.tier, ev.resource);
        break;
      }
      case detail::EventKind::reoptimize:
        reoptimize(ev.tier);
        break;
    }
  }
  if (departed != jobs.size()) throw std::logic_error("sim: not every job left the last tier");

  for (auto& rec : result.jobs) {
    rec.total_wait = total_wait(rec.job);
    rec.response = response_time(rec.job);
    rec.penalty = job_penalty(config.penalty, rec.total_wait);
  }
  result.totals = summarize(result.jobs, config.penalty);
  return result;
}

struct StrategyReport {
  std::string strategy;
  SimTotals totals;
  double waiting_improvement_pct = 0.0;  // relative to the first strategy
  double penalty_improvement_pct = 0.0;
};

struct ExperimentReport {
  std::vector<StrategyReport> rows;
  std::vector<SimResult> results;
};

/// Runs every configuration on the same job list. Improvements are measured
/// against the first configuration.
inline ExperimentReport compare_strategies(const std::vector<Job>& jobs, const std::vector<SimConfig>& configs) {
  if (configs.empty()) throw Error("compare: no strategies given");
  for (const auto& c : configs) {
    if (!(c.environment == configs.front().environment))
      throw Error("compare: strategies must share one environment");
    if (!(c.penalty == configs.front().penalty)) throw Error("compare: strategies must share one penalty model");
  }
  ExperimentReport report;
  for (const auto& c : configs) report.results.push_back(run_sim(jobs, c));
  const auto& ref = report.results.front().totals;
  for (const auto& r : report.results) {
    report.rows.push_back(StrategyReport{r.strategy, r.totals, improvement_pct(ref.total_waiting, r.totals.total_waiting),
                                         improvement_pct(ref.total_penalty_sum, r.totals.total_penalty_sum)});
  }
  return report;
}

}  // namespace tiersched
