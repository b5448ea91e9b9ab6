#pragma once

// CSV renderings of runs and experiments. Numbers use fixed decimals so that
// identical results give byte-identical files.

#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tiersched/experiment.hpp"
#include "tiersched/ga.hpp"
#include "tiersched/model.hpp"
#include "tiersched/sim.hpp"

namespace tiersched {

inline std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);  // no "-0.00"
  return s;
}

/// Columns: generation, best_waiting, best_penalty_aggregate.
inline std::string trace_csv(const std::vector<TracePoint>& trace, const PenaltyModel& penalty) {
  std::string out = "generation,best_waiting,best_penalty_aggregate\n";
  for (const auto& p : trace)
    out += std::to_string(p.generation) + "," + fixed(p.best_fitness, 6) + "," +
           fixed(aggregate_penalty(penalty, p.best_fitness), 6) + "\n";
  return out;
}

/// Before/after rows: waiting to 4 decimals, penalty to 3, percentages to 2.
inline std::string table_csv(const std::vector<TableRow>& rows) {
  std::string out =
      "instance,jobs,initial_waiting,initial_penalty,enhanced_waiting,enhanced_penalty,waiting_improvement_pct,"
      "penalty_improvement_pct\n";
  for (const auto& r : rows)
    out += r.instance + "," + std::to_string(r.jobs) + "," + fixed(r.initial_waiting, 4) + "," +
           fixed(r.initial_penalty, 3) + "," + fixed(r.enhanced_waiting, 4) + "," + fixed(r.enhanced_penalty, 3) +
           "," + fixed(r.waiting_improvement_pct, 2) + "," + fixed(r.penalty_improvement_pct, 2) + "\n";
  return out;
}

inline std::string totals_fields(const SimTotals& t) {
  return fixed(t.total_waiting, 4) + "," + fixed(t.total_penalty_sum, 6) + "," + fixed(t.total_penalty_aggregate, 6) +
         "," + fixed(t.mean_wait, 4) + "," + fixed(t.max_wait, 4);
}

inline constexpr const char* kTotalsHeader = "total_waiting,total_penalty_sum,total_penalty_aggregate,mean_wait,max_wait";

inline std::string summary_csv(const std::vector<SimResult>& results) {
  std::string out = std::string("strategy,") + kTotalsHeader + "\n";
  for (const auto& r : results) out += r.strategy + "," + totals_fields(r.totals) + "\n";
  return out;
}

/// One row per job: per-tier waits, then W, Z and the job penalty.
inline std::string jobs_csv(const SimResult& result) {
  std::size_t tiers = result.jobs.empty() ? 0 : result.jobs.front().job.num_tiers();
  std::string out = "job_id";
  for (std::size_t j = 0; j < tiers; ++j) out += ",wait_tier" + std::to_string(j + 1);
  out += ",total_wait,response,penalty\n";
  for (const auto& rec : result.jobs) {
    out += std::to_string(rec.job.id);
    for (const auto& w : rec.job.waits) out += "," + fixed(w.value_or(0.0), 6);
    out += "," + fixed(rec.total_wait, 6) + "," + fixed(rec.response, 6) + "," + fixed(rec.penalty, 6) + "\n";
  }
  return out;
}

inline std::string replications_csv(const ComparisonOutcome& outcome) {
  std::string out = std::string("replication,strategy,") + kTotalsHeader + "\n";
  for (std::size_t r = 0; r < outcome.totals.size(); ++r)
    for (std::size_t s = 0; s < outcome.strategies.size(); ++s)
      out += std::to_string(r) + "," + outcome.strategies[s] + "," + totals_fields(outcome.totals[r][s]) + "\n";
  return out;
}

inline std::string stats_csv(const ComparisonOutcome& outcome) {
  std::string out =
      "strategy,replications,total_waiting_mean,total_waiting_sd,mean_wait_mean,mean_wait_sd,max_wait_mean,"
      "max_wait_sd\n";
  for (std::size_t s = 0; s < outcome.strategies.size(); ++s)
    out += outcome.strategies[s] + "," + std::to_string(outcome.totals.size()) + "," +
           fixed(outcome.total_waiting[s].mean, 4) + "," + fixed(outcome.total_waiting[s].sd, 4) + "," +
           fixed(outcome.mean_wait[s].mean, 4) + "," + fixed(outcome.mean_wait[s].sd, 4) + "," +
           fixed(outcome.max_wait[s].mean, 4) + "," + fixed(outcome.max_wait[s].sd, 4) + "\n";
  return out;
}

inline std::string verdict_csv(const ComparisonOutcome& outcome) {
  std::string out = "lower,higher,mean_gap,bootstrap_p,positive\n";
  for (const auto& g : outcome.gaps)
    out += g.lower + "," + g.higher + "," + fixed(g.mean_gap, 4) + "," + fixed(g.p_value, 4) + "," +
           (g.positive ? "yes" : "no") + "\n";
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace tiersched
