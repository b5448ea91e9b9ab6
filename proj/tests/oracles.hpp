#pragma once

// Reference computations written independently of the library internals.
// Slow on purpose: plain loops, full enumeration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <tuple>
#include <vector>

#include "tiersched/model.hpp"

namespace tiersched::test {

inline double penalty_formula(double waiting, double chi = 1.0, double nu = 0.01) {
  return chi * (1.0 - std::exp(-nu * waiting));
}

// Serve each queue front to back from its busy-until time, summing the time
// every job spends before it starts.
inline double replay_waiting(const TierSnapshot& snap, const std::vector<JobId>& order) {
  double total = 0.0;
  std::size_t next = 0;
  for (std::size_t k = 0; k < snap.queues.size(); ++k) {
    double clock = snap.busy_until[k];
    for (std::size_t p = 0; p < snap.queues[k].size(); ++p) {
      const JobId id = order[next++];
      total += clock;
      clock += snap.exec_of.at(id);
    }
  }
  return total;
}

inline std::vector<JobId> flatten(const TierSnapshot& snap) {
  std::vector<JobId> out;
  for (const auto& q : snap.queues) out.insert(out.end(), q.begin(), q.end());
  return out;
}

// Minimum over every ordering of every job across the tier's queue slots.
inline double brute_force_virtual(const TierSnapshot& snap) {
  auto order = flatten(snap);
  std::sort(order.begin(), order.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, replay_waiting(snap, order));
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

// Minimum when jobs keep their queue: each queue enumerated on its own.
inline double brute_force_segmented(const TierSnapshot& snap) {
  double total = 0.0;
  for (std::size_t k = 0; k < snap.queues.size(); ++k) {
    auto q = snap.queues[k];
    std::sort(q.begin(), q.end());
    double best = std::numeric_limits<double>::infinity();
    do {
      double clock = snap.busy_until[k], w = 0.0;
      for (auto id : q) {
        w += clock;
        clock += snap.exec_of.at(id);
      }
      best = std::min(best, w);
    } while (std::next_permutation(q.begin(), q.end()));
    total += q.empty() ? 0.0 : best;
  }
  return total;
}

// Waiting of a single queue served shortest-first.
inline double spt_waiting(std::vector<double> exec) {
  std::sort(exec.begin(), exec.end());
  double clock = 0.0, total = 0.0;
  for (auto e : exec) {
    total += clock;
    clock += e;
  }
  return total;
}

struct RandomSnapshotSpec {
  std::size_t min_jobs = 1, max_jobs = 9;
  std::size_t queues = 3;
  bool busy = false;
};

// Exec times on a 1e-3 grid so that distinct orderings rarely tie by accident.
inline TierSnapshot random_snapshot(std::mt19937_64& gen, const RandomSnapshotSpec& spec) {
  std::uniform_int_distribution<std::size_t> n_dist(spec.min_jobs, spec.max_jobs);
  std::uniform_int_distribution<std::size_t> q_dist(0, spec.queues - 1);
  std::uniform_int_distribution<int> exec_dist(50, 5000);
  std::uniform_int_distribution<int> busy_dist(0, 3000);
  TierSnapshot snap;
  snap.queues.resize(spec.queues);
  for (std::size_t k = 0; k < spec.queues; ++k) snap.busy_until.push_back(spec.busy ? busy_dist(gen) / 1000.0 : 0.0);
  const std::size_t n = n_dist(gen);
  for (JobId id = 1; id <= n; ++id) {
    snap.queues[q_dist(gen)].push_back(id);
    snap.exec_of[id] = exec_dist(gen) / 1000.0;
  }
  return snap;
}

// FIFO single-tier, single-resource waits by the Lindley recursion.
inline std::vector<double> lindley_waits(const std::vector<double>& arrivals, const std::vector<double>& service) {
  std::vector<double> w(arrivals.size(), 0.0);
  for (std::size_t i = 1; i < arrivals.size(); ++i)
    w[i] = std::max(0.0, w[i - 1] + service[i - 1] - (arrivals[i] - arrivals[i - 1]));
  return w;
}

// Per-job waits of an N-tier line of M identical FIFO resources per tier with
// plain round robin dispatch in arrival order (ties by job index).
struct RoundRobinOracle {
  std::vector<std::vector<double>> waits;  // [job][tier]
  std::vector<std::vector<std::size_t>> resource;
};

inline RoundRobinOracle round_robin_line(const std::vector<double>& first_arrivals,
                                         const std::vector<std::vector<double>>& exec,
                                         const std::vector<std::size_t>& resources_per_tier) {
  const std::size_t n = first_arrivals.size(), tiers = resources_per_tier.size();
  RoundRobinOracle out;
  out.waits.assign(n, std::vector<double>(tiers, 0.0));
  out.resource.assign(n, std::vector<std::size_t>(tiers, 0));
  std::vector<double> arrive = first_arrivals;
  for (std::size_t j = 0; j < tiers; ++j) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::tie(arrive[a], a) < std::tie(arrive[b], b); });
    std::vector<double> free_at(resources_per_tier[j], 0.0);
    std::vector<double> depart(n);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t i = idx[r];
      const std::size_t k = r % resources_per_tier[j];
      const double start = std::max(arrive[i], free_at[k]);
      out.waits[i][j] = start - arrive[i];
      out.resource[i][j] = k;
      free_at[k] = start + exec[i][j];
      depart[i] = free_at[k];
    }
    arrive = depart;
  }
  return out;
}

}  // namespace tiersched::test
