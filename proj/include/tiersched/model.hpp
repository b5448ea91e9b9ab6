#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace tiersched {

using JobId = std::uint32_t;
using Duration = double;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A job travelling through the tiers. Per-tier vectors are indexed by tier.
struct Job {
  JobId id = 0;
  std::vector<Duration> exec_times;
  std::vector<double> arrivals;
  std::vector<std::optional<double>> departures;
  std::vector<std::optional<Duration>> waits;

  std::size_t num_tiers() const { return exec_times.size(); }
};

struct Environment {
  std::size_t num_tiers = 2;
  std::vector<std::size_t> resources_per_tier{3, 3};

  void validate() const {
    if (num_tiers == 0) throw Error("environment: num_tiers must be >= 1");
    if (resources_per_tier.size() != num_tiers)
      throw Error("environment: resources_per_tier must have num_tiers entries");
    for (auto m : resources_per_tier)
      if (m == 0) throw Error("environment: every tier needs at least one resource");
  }

  bool operator==(const Environment&) const = default;
};

/// Exponential SLA penalty chi * (1 - exp(-nu * W)).
struct PenaltyModel {
  double chi = 1.0;
  double nu = 0.01;

  void validate() const {
    if (!(chi > 0.0) || !std::isfinite(chi)) throw Error("penalty: chi must be positive and finite");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw Error("penalty: nu must be positive and finite");
  }

  bool operator==(const PenaltyModel&) const = default;
};

/// Frozen state of one tier: the waiting jobs of each resource queue (head
/// first) plus how long each resource stays busy with the job it is serving.
struct TierSnapshot {
  std::size_t tier_index = 0;
  std::vector<std::vector<JobId>> queues;
  std::map<JobId, Duration> exec_of;
  std::vector<Duration> busy_until;

  std::size_t num_queues() const { return queues.size(); }

  std::size_t job_count() const {
    std::size_t n = 0;
    for (const auto& q : queues) n += q.size();
    return n;
  }

  void validate() const {
    if (queues.empty()) throw Error("snapshot: at least one queue is required");
    if (busy_until.size() != queues.size())
      throw Error("snapshot: busy_until must have one entry per queue");
    for (auto b : busy_until)
      if (!(b >= 0.0) || !std::isfinite(b)) throw Error("snapshot: busy_until must be finite and >= 0");
    std::unordered_set<JobId> seen;
    for (const auto& q : queues) {
      for (auto id : q) {
        if (!seen.insert(id).second)
          throw Error("snapshot: job " + std::to_string(id) + " is queued more than once");
        auto it = exec_of.find(id);
        if (it == exec_of.end())
          throw Error("snapshot: no execution time for job " + std::to_string(id));
        if (!(it->second > 0.0) || !std::isfinite(it->second))
          throw Error("snapshot: execution time of job " + std::to_string(id) + " must be positive");
      }
    }
    if (seen.size() != exec_of.size())
      throw Error("snapshot: exec_of lists jobs that are not queued");
  }

  bool operator==(const TierSnapshot&) const = default;
};

/// The queues of a tier cascaded into one permutation. Segment k spans
/// [start(k), end(k)) and holds the contents of queue k.
struct VirtualQueue {
  std::vector<JobId> order;
  std::vector<std::size_t> boundaries;  // num_queues - 1 cut indices

  std::size_t num_segments() const { return boundaries.size() + 1; }
  std::size_t segment_begin(std::size_t k) const { return k == 0 ? 0 : boundaries[k - 1]; }
  std::size_t segment_end(std::size_t k) const {
    return k == boundaries.size() ? order.size() : boundaries[k];
  }
  std::span<const JobId> segment(std::size_t k) const {
    return std::span<const JobId>(order).subspan(segment_begin(k), segment_end(k) - segment_begin(k));
  }

  bool operator==(const VirtualQueue&) const = default;
};

/// Cut indices for segments of the given lengths.
inline std::vector<std::size_t> boundaries_for(std::span<const std::size_t> lengths) {
  std::vector<std::size_t> cuts;
  std::size_t acc = 0;
  for (std::size_t k = 0; k + 1 < lengths.size(); ++k) {
    acc += lengths[k];
    cuts.push_back(acc);
  }
  return cuts;
}

/// Cascade the snapshot's queues in resource order.
inline VirtualQueue to_virtual_queue(const TierSnapshot& snapshot) {
  VirtualQueue vq;
  std::vector<std::size_t> lengths;
  for (const auto& q : snapshot.queues) {
    vq.order.insert(vq.order.end(), q.begin(), q.end());
    lengths.push_back(q.size());
  }
  vq.boundaries = boundaries_for(lengths);
  return vq;
}

/// Throws unless `vq` is a permutation of the snapshot's jobs whose segment
/// lengths equal the snapshot's queue lengths.
inline void validate_virtual_queue(const TierSnapshot& snapshot, const VirtualQueue& vq) {
  if (vq.boundaries.size() + 1 != snapshot.num_queues())
    throw Error("virtual queue: expected " + std::to_string(snapshot.num_queues() - 1) + " boundaries");
  std::size_t prev = 0;
  for (std::size_t k = 0; k < vq.boundaries.size(); ++k) {
    auto b = vq.boundaries[k];
    if (b < prev || b > vq.order.size()) throw Error("virtual queue: boundaries out of order or range");
    prev = b;
  }
  for (std::size_t k = 0; k < snapshot.num_queues(); ++k)
    if (vq.segment_end(k) - vq.segment_begin(k) != snapshot.queues[k].size())
      throw Error("virtual queue: segment " + std::to_string(k) + " length differs from its queue");
  if (vq.order.size() != snapshot.exec_of.size()) throw Error("virtual queue: not a permutation of the tier's jobs");
  std::unordered_set<JobId> seen;
  for (auto id : vq.order) {
    if (!snapshot.exec_of.contains(id)) throw Error("virtual queue: unknown job " + std::to_string(id));
    if (!seen.insert(id).second) throw Error("virtual queue: duplicate job " + std::to_string(id));
  }
}

inline Duration total_exec_time(const Job& job) {
  Duration sum = 0.0;
  for (auto e : job.exec_times) sum += e;
  return sum;
}

/// Sum of per-tier waits; throws if any tier's wait is still unset.
inline Duration total_wait(const Job& job) {
  Duration sum = 0.0;
  for (std::size_t j = 0; j < job.waits.size(); ++j) {
    if (!job.waits[j]) throw Error("job " + std::to_string(job.id) + ": wait at tier " + std::to_string(j) + " is unset");
    sum += *job.waits[j];
  }
  if (job.waits.size() != job.exec_times.size())
    throw Error("job " + std::to_string(job.id) + ": waits and exec_times differ in length");
  return sum;
}

inline Duration response_time(const Job& job) { return total_exec_time(job) + total_wait(job); }

inline double job_penalty(const PenaltyModel& model, Duration total_wait) {
  if (!(total_wait >= 0.0)) throw Error("penalty: waiting time must be >= 0");
  return model.chi * -std::expm1(-model.nu * total_wait);
}

inline double total_penalty(const PenaltyModel& model, std::span<const Job> jobs) {
  double sum = 0.0;
  for (const auto& job : jobs) sum += job_penalty(model, total_wait(job));
  return sum;
}

/// Total waiting of jobs laid out segment by segment: `exec` holds execution
/// times in virtual-queue order and `busy` the head-of-line delay per segment.
inline Duration segmented_total_wait(std::span<const Duration> exec, std::span<const std::size_t> boundaries,
                                     std::span<const Duration> busy) {
  Duration total = 0.0;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < busy.size(); ++k) {
    std::size_t end = k < boundaries.size() ? boundaries[k] : exec.size();
    Duration clock = busy[k];
    for (; pos < end; ++pos) {
      total += clock;
      clock += exec[pos];
    }
  }
  return total;
}

struct WaitingEvaluation {
  Duration total_wait = 0.0;
  std::map<JobId, Duration> per_job_wait;
};

inline WaitingEvaluation evaluate_waiting(const TierSnapshot& snapshot, const VirtualQueue& vq) {
  validate_virtual_queue(snapshot, vq);
  WaitingEvaluation out;
  for (std::size_t k = 0; k < vq.num_segments(); ++k) {
    Duration clock = snapshot.busy_until[k];
    for (auto id : vq.segment(k)) {
      out.per_job_wait[id] = clock;
      out.total_wait += clock;
      clock += snapshot.exec_of.at(id);
    }
  }
  return out;
}

inline TierSnapshot apply_schedule(const TierSnapshot& snapshot, const VirtualQueue& vq) {
  validate_virtual_queue(snapshot, vq);
  TierSnapshot out = snapshot;
  for (std::size_t k = 0; k < vq.num_segments(); ++k) {
    auto seg = vq.segment(k);
    out.queues[k].assign(seg.begin(), seg.end());
  }
  return out;
}

/// Penalty applied to an aggregate waiting figure, as the tier tables report it.
inline double aggregate_penalty(const PenaltyModel& model, Duration aggregate_wait) {
  return job_penalty(model, aggregate_wait);
}

/// (initial - enhanced) / initial in percent; 0 when initial is 0.
inline double improvement_pct(double initial, double enhanced) {
  if (initial == 0.0) return 0.0;
  return (initial - enhanced) / initial * 100.0;
}

}  // namespace tiersched
