#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tiersched/ga.hpp"
#include "tiersched/model.hpp"

namespace tiersched {

enum class StrategyKind { virtual_ga, segmented_ga, wrr, wlc };

inline std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::virtual_ga: return "virtual_ga";
    case StrategyKind::segmented_ga: return "segmented_ga";
    case StrategyKind::wrr: return "wrr";
    case StrategyKind::wlc: return "wlc";
  }
  return "unknown";
}

inline StrategyKind parse_strategy_kind(std::string_view name) {
  if (name == "virtual_ga") return StrategyKind::virtual_ga;
  if (name == "segmented_ga") return StrategyKind::segmented_ga;
  if (name == "wrr") return StrategyKind::wrr;
  if (name == "wlc") return StrategyKind::wlc;
  throw Error("unknown strategy kind '" + std::string(name) + "'");
}

struct Strategy {
  StrategyKind kind = StrategyKind::virtual_ga;
  GaConfig ga;
  // Per-resource weights for wrr/wlc; empty means equal weights.
  std::vector<std::uint32_t> weights;

  bool is_ga() const { return kind == StrategyKind::virtual_ga || kind == StrategyKind::segmented_ga; }

  void validate() const {
    if (is_ga()) ga.validate();
    for (auto w : weights)
      if (w == 0) throw Error("strategy: weights must be strictly positive");
  }

  bool operator==(const Strategy&) const = default;
};

/// Weights for `m` resources: the configured ones, or all ones when none are set.
inline std::vector<std::uint32_t> effective_weights(std::span<const std::uint32_t> weights, std::size_t m) {
  if (weights.empty()) return std::vector<std::uint32_t>(m, 1);
  if (weights.size() != m) throw Error("strategy: expected " + std::to_string(m) + " weights");
  return {weights.begin(), weights.end()};
}

// Interleaved weighted round robin (the LVS scheme): each full cycle hands out
// weight[k] slots to queue k, stepping the current-weight threshold down by the
// gcd of the weights.
struct WrrCursor {
  std::size_t index = 0;
  std::uint32_t current_weight = 0;
  bool started = false;

  bool operator==(const WrrCursor&) const = default;
};

inline std::pair<std::size_t, WrrCursor> dispatch_wrr(std::span<const std::uint32_t> weights, WrrCursor cursor) {
  if (weights.empty()) throw Error("dispatch_wrr: no queues");
  const std::size_t m = weights.size();
  std::uint32_t g = 0, max_w = 0;
  for (auto w : weights) {
    if (w == 0) throw Error("dispatch_wrr: weights must be strictly positive");
    g = std::gcd(g, w);
    max_w = std::max(max_w, w);
  }
  for (;;) {
    if (!cursor.started) {
      cursor.started = true;
      cursor.index = 0;
    } else {
      cursor.index = (cursor.index + 1) % m;
    }
    if (cursor.index == 0) {
      cursor.current_weight = cursor.current_weight > g ? cursor.current_weight - g : 0;
      if (cursor.current_weight == 0) cursor.current_weight = max_w;
    }
    if (weights[cursor.index] >= cursor.current_weight) return {cursor.index, cursor};
  }
}

inline std::pair<std::size_t, WrrCursor> dispatch_wrr(const TierSnapshot& state, std::span<const std::uint32_t> weights,
                                                      WrrCursor cursor) {
  return dispatch_wrr(effective_weights(weights, state.num_queues()), cursor);
}

/// Index minimising connections[k] / weights[k]; ties go to the lowest index.
inline std::size_t dispatch_wlc(std::span<const std::size_t> connections, std::span<const std::uint32_t> weights) {
  if (connections.empty()) throw Error("dispatch_wlc: no queues");
  if (weights.size() != connections.size()) throw Error("dispatch_wlc: one weight per queue required");
  std::size_t best = 0;
  for (std::size_t k = 1; k < connections.size(); ++k) {
    // connections[k]/weights[k] < connections[best]/weights[best], cross-multiplied
    if (static_cast<std::uint64_t>(connections[k]) * weights[best] <
        static_cast<std::uint64_t>(connections[best]) * weights[k])
      best = k;
  }
  return best;
}

/// Connections of each resource: its queue length plus one if it is serving a job.
inline std::vector<std::size_t> connection_counts(const TierSnapshot& state) {
  std::vector<std::size_t> c(state.num_queues());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = state.queues[k].size() + (state.busy_until[k] > 0.0 ? 1 : 0);
  return c;
}

inline std::size_t dispatch_wlc(const TierSnapshot& state, std::span<const std::uint32_t> weights) {
  const auto w = effective_weights(weights, state.num_queues());
  return dispatch_wlc(connection_counts(state), w);
}

/// Runs an independent GA on every resource queue; jobs never change queue.
/// The trace is the per-generation sum of the per-queue best-so-far values.
inline GaRun run_segmented_ga(const TierSnapshot& snapshot, const GaConfig& config) {
  config.validate();
  snapshot.validate();
  if (snapshot.job_count() == 0) throw Error("run_segmented_ga: snapshot has no waiting jobs");

  GaRun out;
  out.best_order = to_virtual_queue(snapshot);
  out.trace.resize(config.max_generations + 1);
  for (std::size_t g = 0; g < out.trace.size(); ++g) out.trace[g].generation = g;

  std::size_t offset = 0;
  for (std::size_t k = 0; k < snapshot.num_queues(); ++k) {
    const auto& queue = snapshot.queues[k];
    if (queue.empty()) continue;
    TierSnapshot single;
    single.tier_index = snapshot.tier_index;
    single.queues = {queue};
    single.busy_until = {snapshot.busy_until[k]};
    for (auto id : queue) single.exec_of[id] = snapshot.exec_of.at(id);

    GaConfig sub = config;
    sub.seed = mix_seed(config.seed, k);
    const GaRun run = run_ga(single, sub);
    std::copy(run.best_order.order.begin(), run.best_order.order.end(),
              out.best_order.order.begin() + static_cast<std::ptrdiff_t>(offset));
    for (std::size_t g = 0; g < out.trace.size(); ++g) out.trace[g].best_fitness += run.trace[g].best_fitness;
    out.best_fitness += run.best_fitness;
    offset += queue.size();
  }
  return out;
}

}  // namespace tiersched
