#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <vector>

#include "tiersched/model.hpp"
#include "tiersched/rng.hpp"

namespace tiersched {

struct GaConfig {
  std::size_t population_size = 10;
  std::size_t max_generations = 500;
  double operator_rate = 0.1;
  std::uint64_t seed = 1;

  void validate() const {
    if (population_size < 2) throw Error("ga: population_size must be >= 2");
    if (max_generations < 1) throw Error("ga: max_generations must be >= 1");
    if (!(operator_rate > 0.0 && operator_rate <= 1.0)) throw Error("ga: operator_rate must lie in (0, 1]");
  }

  /// Crossovers (and, separately, mutations) applied per generation.
  std::size_t operators_per_generation() const {
    auto n = static_cast<std::size_t>(std::ceil(operator_rate * static_cast<double>(population_size) - 1e-9));
    return std::max<std::size_t>(n, 1);
  }

  bool operator==(const GaConfig&) const = default;
};

struct TracePoint {
  std::size_t generation = 0;
  Duration best_fitness = 0.0;

  bool operator==(const TracePoint&) const = default;
};

struct GaRun {
  VirtualQueue best_order;
  Duration best_fitness = 0.0;
  std::vector<TracePoint> trace;

  bool operator==(const GaRun&) const = default;
};

inline Duration fitness(const TierSnapshot& snapshot, const VirtualQueue& vq) {
  return evaluate_waiting(snapshot, vq).total_wait;
}

/// Roulette weights for a minimisation objective: w_r = f_max + f_min - f_r,
/// renormalised. Uniform when every candidate has the same fitness.
inline std::vector<double> selection_weights(std::span<const double> fitnesses) {
  if (fitnesses.empty()) throw Error("selection_weights: no candidates");
  double lo = fitnesses[0], hi = fitnesses[0];
  for (auto f : fitnesses) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw Error("selection_weights: fitness must be finite and >= 0");
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  std::vector<double> w(fitnesses.size());
  if (hi == lo) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
    return w;
  }
  double sum = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    w[r] = hi + lo - fitnesses[r];
    sum += w[r];
  }
  for (auto& x : w) x /= sum;
  return w;
}

inline std::size_t roulette_select(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) throw Error("roulette_select: empty weight vector");
  double sum = 0.0;
  for (auto w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("roulette_select: weights must be finite and >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("roulette_select: weights must sum to 1");
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    last_positive = i;
    cum += weights[i];
    if (u < cum) return i;
  }
  return last_positive;
}

namespace detail {

inline constexpr int kRedraws = 32;

struct PermHash {
  std::size_t operator()(const std::vector<std::uint32_t>& p) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto x : p) h = (h ^ x) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h);
  }
};

template <class T>
void require_same_elements(std::span<const T> a, std::span<const T> b) {
  std::vector<T> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb || std::adjacent_find(sa.begin(), sa.end()) != sa.end())
    throw Error("crossover: parents are not permutations of the same set");
}

// Unchecked single-point crossover for dense index permutations 0..n-1.
inline void crossover_indices(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b, std::size_t cut,
                              std::vector<std::uint32_t>& child, std::vector<char>& taken) {
  const std::size_t n = a.size();
  child.assign(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(cut));
  taken.assign(n, 0);
  for (std::size_t i = 0; i < cut; ++i) taken[a[i]] = 1;
  for (auto g : b)
    if (!taken[g]) child.push_back(g);
}

template <class T>
void insert_in_place(std::vector<T>& v, std::size_t from, std::size_t to) {
  if (from < to)
    std::rotate(v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(from) + 1,
                v.begin() + static_cast<std::ptrdiff_t>(to) + 1);
  else if (to < from)
    std::rotate(v.begin() + static_cast<std::ptrdiff_t>(to), v.begin() + static_cast<std::ptrdiff_t>(from),
                v.begin() + static_cast<std::ptrdiff_t>(from) + 1);
}

}  // namespace detail

/// Keeps parent_a's prefix [0, cut) and appends the remaining elements in the
/// order they occur in parent_b, so the child is always a permutation.
template <class T>
std::vector<T> single_point_crossover(std::span<const T> parent_a, std::span<const T> parent_b, std::size_t cut) {
  if (parent_a.size() != parent_b.size()) throw Error("crossover: parents differ in length");
  if (cut > parent_a.size()) throw Error("crossover: cut out of range");
  detail::require_same_elements(parent_a, parent_b);
  std::vector<T> child(parent_a.begin(), parent_a.begin() + static_cast<std::ptrdiff_t>(cut));
  std::unordered_set<T> prefix(child.begin(), child.end());
  for (const auto& g : parent_b)
    if (!prefix.contains(g)) child.push_back(g);
  return child;
}

/// Removes the element at `from` and reinserts it so that it ends up at `to`.
template <class T>
std::vector<T> insert_mutation(std::span<const T> order, std::size_t from, std::size_t to) {
  if (from >= order.size() || to >= order.size()) throw Error("insert_mutation: index out of range");
  std::vector<T> out(order.begin(), order.end());
  detail::insert_in_place(out, from, to);
  return out;
}

/// Observer that ignores every generation.
struct NoObserver {
  void operator()(std::size_t, const std::vector<std::vector<JobId>>&) const {}
};

/// Permutation GA over a tier's virtual queue.
///
/// The first individual is the incumbent ordering, the rest are uniform random
/// permutations. Per generation, `operators_per_generation()` single-point
/// crossovers are applied to roulette-selected parent pairs; each yields the
/// two complementary children. The next generation is the children plus the
/// fittest distinct parents. Then as many insert mutations are applied in place
/// to members of that generation chosen uniformly, never to its fittest member,
/// so the best schedule found is never lost.
///
/// Operators whose result was already evaluated earlier in the run are redrawn
/// (up to detail::kRedraws times). The run is a pure function of the snapshot
/// and the config, seed included.
///
/// `observer(generation, population)` sees every generation, including the
/// initial one, as job-id orders.
template <class Observer = NoObserver>
GaRun run_ga(const TierSnapshot& snapshot, const GaConfig& config, Observer&& observer = {}) {
  config.validate();
  snapshot.validate();
  const VirtualQueue incumbent = to_virtual_queue(snapshot);
  const std::size_t n = incumbent.order.size();
  if (n == 0) throw Error("run_ga: snapshot has no waiting jobs");

  std::vector<Duration> exec_of_index(n);
  for (std::size_t i = 0; i < n; ++i) exec_of_index[i] = snapshot.exec_of.at(incumbent.order[i]);
  const auto& cuts = incumbent.boundaries;
  const auto& busy = snapshot.busy_until;

  using Perm = std::vector<std::uint32_t>;
  std::vector<Duration> scratch(n);
  auto evaluate = [&](const Perm& p) {
    for (std::size_t i = 0; i < n; ++i) scratch[i] = exec_of_index[p[i]];
    return segmented_total_wait(scratch, cuts, busy);
  };
  auto to_ids = [&](const Perm& p) {
    std::vector<JobId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = incumbent.order[p[i]];
    return ids;
  };
  auto notify = [&](std::size_t gen, const std::vector<Perm>& pop) {
    if constexpr (!std::is_same_v<std::decay_t<Observer>, NoObserver>) {
      std::vector<std::vector<JobId>> view;
      view.reserve(pop.size());
      for (const auto& p : pop) view.push_back(to_ids(p));
      observer(gen, view);
    }
  };

  Rng rng(config.seed);
  const std::size_t pop_size = config.population_size;
  std::vector<Perm> population(pop_size, Perm(n));
  std::iota(population[0].begin(), population[0].end(), 0u);
  for (std::size_t r = 1; r < pop_size; ++r) {
    population[r] = population[0];
    rng.shuffle(population[r]);
  }
  std::vector<Duration> fit(pop_size);
  std::vector<std::size_t> born(pop_size, 0), next_born;
  for (std::size_t r = 0; r < pop_size; ++r) fit[r] = evaluate(population[r]);

  auto best_it = std::min_element(fit.begin(), fit.end());
  Perm best = population[static_cast<std::size_t>(best_it - fit.begin())];
  Duration best_fit = *best_it;

  GaRun run;
  run.trace.reserve(config.max_generations + 1);
  run.trace.push_back({0, best_fit});
  notify(0, population);

  const std::size_t ops = config.operators_per_generation();
  std::vector<Perm> children, next;
  std::vector<Duration> child_fit, next_fit;
  std::vector<std::size_t> rank(pop_size);
  std::vector<char> taken;
  Perm child;
  auto in = [](const std::vector<Perm>& v, const Perm& p) { return std::find(v.begin(), v.end(), p) != v.end(); };
  std::unordered_set<Perm, detail::PermHash> visited(population.begin(), population.end());

  for (std::size_t gen = 1; gen <= config.max_generations; ++gen) {
    const auto weights = selection_weights(fit);
    children.clear();
    child_fit.clear();
    for (std::size_t c = 0; c < ops; ++c) {
      std::size_t a = 0, b = 0, cut = 0;
      for (int attempt = 0;; ++attempt) {
        a = roulette_select(weights, rng);
        b = roulette_select(weights, rng);
        cut = n > 1 ? 1 + static_cast<std::size_t>(rng.below(n - 1)) : 0;
        detail::crossover_indices(population[a], population[b], cut, child, taken);
        if (attempt == detail::kRedraws || !visited.contains(child)) break;
      }
      child_fit.push_back(evaluate(child));
      children.push_back(child);
      visited.insert(child);
      detail::crossover_indices(population[b], population[a], cut, child, taken);
      if (!visited.contains(child)) {
        child_fit.push_back(evaluate(child));
        children.push_back(child);
        visited.insert(child);
      }
    }

    // Children enter; the fittest distinct parents fill the remaining slots,
    // younger first among equals.
    const std::size_t carried = children.size() >= pop_size ? 1 : pop_size - children.size();
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](auto x, auto y) {
      return fit[x] != fit[y] ? fit[x] < fit[y] : born[x] > born[y];
    });
    next.clear();
    next_fit.clear();
    next_born.clear();
    for (auto idx : rank) {
      if (next.size() == carried) break;
      if (!in(next, population[idx])) {
        next.push_back(population[idx]);
        next_fit.push_back(fit[idx]);
        next_born.push_back(born[idx]);
      }
    }
    for (auto idx : rank) {
      if (next.size() == carried) break;
      next.push_back(population[idx]);
      next_fit.push_back(fit[idx]);
      next_born.push_back(born[idx]);
    }
    std::vector<std::size_t> order(children.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return child_fit[x] < child_fit[y]; });
    for (std::size_t c = 0; next.size() < pop_size; ++c) {
      next.push_back(children[order[c]]);
      next_fit.push_back(child_fit[order[c]]);
      next_born.push_back(gen);
    }

    const auto elite =
        static_cast<std::size_t>(std::min_element(next_fit.begin(), next_fit.end()) - next_fit.begin());
    for (std::size_t m = 0; m < ops && n > 1; ++m) {
      auto target = static_cast<std::size_t>(rng.below(pop_size - 1));
      if (target >= elite) ++target;
      for (int attempt = 0;; ++attempt) {
        child = next[target];
        const auto from = static_cast<std::size_t>(rng.below(n));
        auto to = static_cast<std::size_t>(rng.below(n - 1));
        if (to >= from) ++to;
        detail::insert_in_place(child, from, to);
        if (attempt == detail::kRedraws || !visited.contains(child)) break;
      }
      next[target] = child;
      next_fit[target] = evaluate(child);
      visited.insert(child);
      next_born[target] = gen;
    }

    population.swap(next);
    fit.swap(next_fit);
    born.swap(next_born);
    for (std::size_t r = 0; r < pop_size; ++r)
      if (fit[r] < best_fit) {
        best_fit = fit[r];
        best = population[r];
      }
    run.trace.push_back({gen, best_fit});
    notify(gen, population);
  }

  run.best_order.order = to_ids(best);
  run.best_order.boundaries = incumbent.boundaries;
  run.best_fitness = best_fit;
  return run;
}

}  // namespace tiersched
