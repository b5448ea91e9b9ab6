// tiersched: run fixtures and stochastic experiments, write CSV reports.
//
//   tiersched optimize --fixture F [--generations G] [--pop P] [--seed S] [--out D]
//   tiersched simulate --config C [--out D]
//   tiersched compare --config C [--reps R] [--out D]
//   tiersched reproduce-tables [--out D] [--fixtures DIR]
//
// Each run writes manifest.json next to its CSVs; passing that manifest back
// as --config repeats the run.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tiersched/config.hpp"
#include "tiersched/experiment.hpp"
#include "tiersched/ga.hpp"
#include "tiersched/report.hpp"
#include "tiersched/sim.hpp"
#include "tiersched/workload.hpp"

#ifndef TIERSCHED_VERSION
#define TIERSCHED_VERSION "unknown"
#endif
#ifndef TIERSCHED_DEFAULT_FIXTURES
#define TIERSCHED_DEFAULT_FIXTURES "data/fixtures"
#endif

namespace fs = std::filesystem;
namespace ts = tiersched;
using nlohmann::json;

namespace {

int verbosity = 1;  // 0 quiet, 1 normal, 2+ verbose

void info(const std::string& msg) {
  if (verbosity >= 1) std::fprintf(stderr, "%s\n", msg.c_str());
}

void debug(const std::string& msg) {
  if (verbosity >= 2) std::fprintf(stderr, "%s\n", msg.c_str());
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ts::Error("cannot create output directory " + dir.string());
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::vector<std::string>& outputs) {
  json m = {{"tool", "tiersched"}, {"version", TIERSCHED_VERSION}, {"command", command},
            {"config", config},    {"outputs", outputs}};
  ts::write_text(dir / "manifest.json", m.dump(2) + "\n");
}

// A manifest written by `command`, or nullopt when `doc` is not a manifest.
std::optional<json> manifest_config(const json& doc, const std::string& command) {
  if (!doc.is_object() || !doc.contains("command") || !doc.contains("config")) return std::nullopt;
  if (doc.at("command") != command)
    throw ts::Error("manifest was written by '" + doc.at("command").get<std::string>() + "', not '" + command + "'");
  return doc.at("config");
}

struct OptimizeArgs {
  std::string fixture;
  std::string config;
  std::size_t generations = 0;  // 0: chosen from the job count
  std::size_t pop = 10;
  double rate = 0.1;
  std::string out = "out/optimize";
};

int cmd_optimize(OptimizeArgs a, std::optional<std::uint64_t> seed_override) {
  std::uint64_t seed = 1;
  if (!a.config.empty()) {
    const auto doc = ts::read_json_file(a.config);
    const auto cfg = manifest_config(doc, "optimize");
    if (!cfg) throw ts::Error(a.config + ": not an optimize manifest");
    try {
      a.fixture = cfg->at("fixture").get<std::string>();
      a.generations = cfg->at("ga").at("max_generations").get<std::size_t>();
      a.pop = cfg->at("ga").at("population_size").get<std::size_t>();
      a.rate = cfg->at("ga").at("operator_rate").get<double>();
      seed = cfg->at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw ts::Error(a.config + ": malformed optimize manifest (" + e.what() + ")");
    }
  }
  if (a.fixture.empty()) throw ts::Error("optimize: --fixture or --config is required");
  if (seed_override) seed = *seed_override;

  const auto snap = ts::load_fixture(a.fixture);
  if (snap.job_count() == 0) throw ts::Error(a.fixture + ": snapshot has no waiting jobs");
  ts::GaConfig ga;
  ga.population_size = a.pop;
  ga.operator_rate = a.rate;
  ga.max_generations = a.generations ? a.generations : ts::default_generations(snap.job_count());
  ga.seed = seed;
  ga.validate();

  info("optimize: " + a.fixture + " (" + std::to_string(snap.job_count()) + " jobs, " +
       std::to_string(ga.max_generations) + " generations, seed " + std::to_string(seed) + ")");
  const auto run = ts::run_ga(snap, ga);
  const ts::PenaltyModel penalty;
  const auto row = ts::make_row(fs::path(a.fixture).stem().string(), snap.job_count(),
                                ts::fitness(snap, ts::to_virtual_queue(snap)), run.best_fitness, penalty);

  const fs::path out(a.out);
  prepare_dir(out);
  ts::write_text(out / "trace.csv", ts::trace_csv(run.trace, penalty));
  ts::write_text(out / "summary.csv", ts::table_csv({row}));
  ts::write_fixture(out / "enhanced.txt", ts::apply_schedule(snap, run.best_order), "best schedule found");
  const json cfg = {{"fixture", a.fixture},
                    {"seed", seed},
                    {"ga",
                     {{"population_size", ga.population_size},
                      {"max_generations", ga.max_generations},
                      {"operator_rate", ga.operator_rate}}}};
  write_manifest(out, "optimize", cfg, {"trace.csv", "summary.csv", "enhanced.txt"});
  std::printf("initial waiting %s penalty %s\nenhanced waiting %s penalty %s\nimprovement %s%% (penalty %s%%)\n",
              ts::fixed(row.initial_waiting, 4).c_str(), ts::fixed(row.initial_penalty, 3).c_str(),
              ts::fixed(row.enhanced_waiting, 4).c_str(), ts::fixed(row.enhanced_penalty, 3).c_str(),
              ts::fixed(row.waiting_improvement_pct, 2).c_str(), ts::fixed(row.penalty_improvement_pct, 2).c_str());
  return 0;
}

ts::ExperimentConfig load_config(const std::string& path, const std::string& command,
                                 std::optional<std::uint64_t> seed_override) {
  if (path.empty()) throw ts::Error(command + ": --config is required");
  const auto doc = ts::read_json_file(path);
  ts::ExperimentConfig c;
  try {
    const auto cfg = manifest_config(doc, command);
    c = ts::experiment_from_json(cfg ? *cfg : doc);
  } catch (const ts::Error& e) {
    throw ts::Error(path + ": " + e.what());
  }
  if (seed_override) c.seed = *seed_override;
  return c;
}

// Distinct directory names for the configured strategies.
std::vector<std::string> strategy_dirs(const ts::ExperimentConfig& c) {
  std::map<std::string, int> seen;
  std::vector<std::string> out;
  for (const auto& s : c.strategies) {
    std::string name(ts::to_string(s.kind));
    if (int n = seen[name]++; n > 0) name += "_" + std::to_string(n + 1);
    out.push_back(name);
  }
  return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override) {
  const auto c = load_config(config_path, "simulate", seed_override);
  const auto jobs = ts::generate(c.workload_for(0));
  const auto configs = c.sim_configs(0);
  const auto dirs = strategy_dirs(c);
  const fs::path out(out_dir);
  prepare_dir(out);
  std::vector<ts::SimResult> results;
  std::vector<std::string> outputs = {"summary.csv"};
  for (std::size_t s = 0; s < configs.size(); ++s) {
    info("simulate: " + dirs[s] + " on " + std::to_string(jobs.size()) + " jobs");
    auto result = ts::run_sim(jobs, configs[s]);
    const fs::path sub = out / dirs[s];
    prepare_dir(sub);
    ts::write_text(sub / "jobs.csv", ts::jobs_csv(result));
    outputs.push_back(dirs[s] + "/jobs.csv");
    for (const auto& e : result.epochs) {
      const std::string name = "trace_" + std::to_string(e.tier + 1) + "_" + std::to_string(e.epoch) + ".csv";
      ts::write_text(sub / name, ts::trace_csv(e.trace, c.penalty));
      outputs.push_back(dirs[s] + "/" + name);
    }
    debug("  " + std::to_string(result.epochs.size()) + " GA epochs");
    results.push_back(std::move(result));
  }
  ts::write_text(out / "summary.csv", ts::summary_csv(results));
  write_manifest(out, "simulate", ts::to_json(c), outputs);
  std::fputs(ts::summary_csv(results).c_str(), stdout);
  return 0;
}

int cmd_compare(const std::string& config_path, std::optional<std::size_t> reps, const std::string& out_dir,
                std::optional<std::uint64_t> seed_override) {
  auto c = load_config(config_path, "compare", seed_override);
  if (reps) c.replications = *reps;
  c.validate();
  info("compare: " + std::to_string(c.strategies.size()) + " strategies, " + std::to_string(c.replications) +
       " replications");
  const auto outcome = ts::run_comparison(c);
  const fs::path out(out_dir);
  prepare_dir(out);
  ts::write_text(out / "summary.csv", ts::replications_csv(outcome));
  ts::write_text(out / "stats.csv", ts::stats_csv(outcome));
  ts::write_text(out / "verdict.csv", ts::verdict_csv(outcome));
  write_manifest(out, "compare", ts::to_json(c), {"summary.csv", "stats.csv", "verdict.csv"});
  std::fputs(ts::stats_csv(outcome).c_str(), stdout);
  std::string order;
  for (const auto& s : outcome.strategies) order += (order.empty() ? "" : " < ") + s;
  std::printf("ordering %s: %s\n", order.c_str(), outcome.ordered ? "holds" : "not established");
  return 0;
}

int cmd_reproduce_tables(std::string fixtures, const std::string& config_path, const std::string& out_dir,
                         std::optional<std::uint64_t> seed_override) {
  std::uint64_t seed = 1;
  if (!config_path.empty()) {
    const auto cfg = manifest_config(ts::read_json_file(config_path), "reproduce-tables");
    if (!cfg) throw ts::Error(config_path + ": not a reproduce-tables manifest");
    seed = cfg->value("seed", seed);
    if (fixtures.empty()) fixtures = cfg->value("fixtures", std::string());
  }
  if (seed_override) seed = *seed_override;
  if (fixtures.empty()) fixtures = fs::is_directory("data/fixtures") ? "data/fixtures" : TIERSCHED_DEFAULT_FIXTURES;
  for (const auto* names : {&ts::tier_fixture_names(), &ts::queue_fixture_names()})
    for (const auto& n : *names)
      if (!fs::exists(fs::path(fixtures) / (n + ".txt")))
        throw ts::Error("missing fixture " + (fs::path(fixtures) / (n + ".txt")).string());

  info("reproduce-tables: fixtures from " + fixtures + ", seed " + std::to_string(seed));
  const auto t1 = ts::table_csv(ts::tier_table(fixtures, seed));
  const auto t2 = ts::table_csv(ts::queue_table(fixtures, seed));
  const fs::path out(out_dir);
  prepare_dir(out);
  ts::write_text(out / "table1.csv", t1);
  ts::write_text(out / "table2.csv", t2);
  write_manifest(out, "reproduce-tables", {{"seed", seed}, {"fixtures", fixtures}}, {"table1.csv", "table2.csv"});
  std::fputs(t1.c_str(), stdout);
  std::fputs(t2.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-tier job scheduling: virtual-queue GA and baselines"};
  app.set_version_flag("--version", TIERSCHED_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed;
  int verbose = 0;
  bool quiet = false;
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_flag("-v,--verbose", verbose, "More progress output (repeatable)");
  app.add_flag("-q,--quiet", quiet, "Only errors on standard error");

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "Run the virtual-queue GA on a snapshot fixture");
  optimize->add_option("--fixture", opt.fixture, "Snapshot fixture file")->check(CLI::ExistingFile);
  optimize->add_option("--config", opt.config, "Manifest of an earlier optimize run")->check(CLI::ExistingFile);
  optimize->add_option("--generations", opt.generations, "Generations (default: 500 up to 19 jobs, else 1000)");
  optimize->add_option("--pop", opt.pop, "Population size")->capture_default_str();
  optimize->add_option("--rate", opt.rate, "Share of the population receiving each operator")->capture_default_str();
  optimize->add_option("--out", opt.out, "Output directory")->capture_default_str();

  std::string config, out_dir;
  std::optional<std::size_t> reps;
  auto* simulate = app.add_subcommand("simulate", "Simulate every configured strategy on one workload");
  simulate->add_option("--config", config, "Experiment config or manifest")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out_dir, "Output directory (default out/simulate)");

  auto* compare = app.add_subcommand("compare", "Replicated strategy comparison");
  compare->add_option("--config", config, "Experiment config or manifest")->required()->check(CLI::ExistingFile);
  compare->add_option("--reps", reps, "Replications (overrides the config)")->check(CLI::PositiveNumber);
  compare->add_option("--out", out_dir, "Output directory (default out/compare)");

  std::string fixtures;
  auto* tables = app.add_subcommand("reproduce-tables", "Before/after tables for the committed fixtures");
  tables->add_option("--out", out_dir, "Output directory (default out/tables)");
  tables->add_option("--fixtures", fixtures, "Fixture directory");
  tables->add_option("--config", config, "Manifest of an earlier run")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  verbosity = quiet ? 0 : 1 + verbose;

  try {
    if (*optimize) return cmd_optimize(opt, seed);
    if (*simulate) return cmd_simulate(config, out_dir.empty() ? "out/simulate" : out_dir, seed);
    if (*compare) return cmd_compare(config, reps, out_dir.empty() ? "out/compare" : out_dir, seed);
    if (*tables) return cmd_reproduce_tables(fixtures, config, out_dir.empty() ? "out/tables" : out_dir, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "tiersched: error: %s\n", e.what());
    return 1;
  }
  return 1;
}
