#pragma once

// JSON form of ExperimentConfig (needs nlohmann/json on the include path).
//
//   {
//     "schema_version": 1,
//     "seed": 1,
//     "environment": {"num_tiers": 2, "resources_per_tier": [3, 3]},
//     "penalty": {"chi": 1.0, "nu": 0.01},
//     "workload": {"arrival_rate": 2.4, "service_rates": [1.0, 1.0], "num_jobs": 200},
//     "ga": {"population_size": 10, "max_generations": 500, "operator_rate": 0.1},
//     "sim": {"reoptimize_every": 5, "initial_epoch_after": 0},
//     "strategies": [{"kind": "virtual_ga"}, {"kind": "wrr", "weights": [1, 1, 1]}],
//     "replications": 1
//   }
//
// Every section and key is optional and falls back to the defaults above;
// unknown keys are rejected. "reoptimize_every": "never" disables periodic epochs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>
#include <type_traits>

#include "json.hpp"
#include "tiersched/experiment.hpp"

namespace tiersched {

inline constexpr int kConfigSchemaVersion = 1;

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw Error("config: '" + where + "' must be an object");
  const std::set<std::string> ok(known.begin(), known.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw Error("config: unknown key '" + where + "." + key + "'");
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  auto negative = [](const json& v) { return v.is_number_integer() && v.get<std::int64_t>() < 0; };
  bool bad = false;
  if constexpr (std::is_unsigned_v<T>) bad = negative(*it) || it->is_number_float();
  if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
    if constexpr (std::is_unsigned_v<typename T::value_type>)
      if (it->is_array())
        for (const auto& v : *it) bad = bad || negative(v) || v.is_number_float();
  }
  if (bad) throw Error("config: '" + where + "." + key + "' must be a non-negative integer");
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error("config: '" + where + "." + key + "' has the wrong type");
  }
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json strategies = json::array();
  for (const auto& s : c.strategies) {
    json j = {{"kind", std::string(to_string(s.kind))}};
    if (!s.weights.empty()) j["weights"] = s.weights;
    strategies.push_back(std::move(j));
  }
  json reopt = c.reoptimize_every == kNeverReoptimize ? json("never") : json(c.reoptimize_every);
  return json{
      {"schema_version", kConfigSchemaVersion},
      {"seed", c.seed},
      {"environment", {{"num_tiers", c.environment.num_tiers}, {"resources_per_tier", c.environment.resources_per_tier}}},
      {"penalty", {{"chi", c.penalty.chi}, {"nu", c.penalty.nu}}},
      {"workload",
       {{"arrival_rate", c.workload.arrival_rate},
        {"service_rates", c.workload.service_rates},
        {"num_jobs", c.workload.num_jobs}}},
      {"ga",
       {{"population_size", c.ga.population_size},
        {"max_generations", c.ga.max_generations},
        {"operator_rate", c.ga.operator_rate}}},
      {"sim", {{"reoptimize_every", reopt}, {"initial_epoch_after", c.initial_epoch_after}}},
      {"strategies", strategies},
      {"replications", c.replications},
  };
}

/// Accepts a config document or a run manifest (whose "config" key holds one).
inline ExperimentConfig experiment_from_json(const nlohmann::json& doc) {
  using detail::read;
  const nlohmann::json& j = doc.contains("config") && doc.contains("command") ? doc.at("config") : doc;
  detail::reject_unknown(j, "config",
                         {"schema_version", "seed", "environment", "penalty", "workload", "ga", "sim", "strategies",
                          "replications"});
  int version = kConfigSchemaVersion;
  read(j, "schema_version", "config", version);
  if (version != kConfigSchemaVersion)
    throw Error("config: unsupported schema_version " + std::to_string(version) + " (expected " +
                std::to_string(kConfigSchemaVersion) + ")");

  ExperimentConfig c;
  read(j, "seed", "config", c.seed);
  read(j, "replications", "config", c.replications);
  if (auto it = j.find("environment"); it != j.end()) {
    detail::reject_unknown(*it, "environment", {"num_tiers", "resources_per_tier"});
    read(*it, "num_tiers", "environment", c.environment.num_tiers);
    read(*it, "resources_per_tier", "environment", c.environment.resources_per_tier);
  }
  if (auto it = j.find("penalty"); it != j.end()) {
    detail::reject_unknown(*it, "penalty", {"chi", "nu"});
    read(*it, "chi", "penalty", c.penalty.chi);
    read(*it, "nu", "penalty", c.penalty.nu);
  }
  if (auto it = j.find("workload"); it != j.end()) {
    detail::reject_unknown(*it, "workload", {"arrival_rate", "service_rates", "num_jobs"});
    read(*it, "arrival_rate", "workload", c.workload.arrival_rate);
    read(*it, "service_rates", "workload", c.workload.service_rates);
    read(*it, "num_jobs", "workload", c.workload.num_jobs);
  }
  if (auto it = j.find("ga"); it != j.end()) {
    detail::reject_unknown(*it, "ga", {"population_size", "max_generations", "operator_rate"});
    read(*it, "population_size", "ga", c.ga.population_size);
    read(*it, "max_generations", "ga", c.ga.max_generations);
    read(*it, "operator_rate", "ga", c.ga.operator_rate);
  }
  if (auto it = j.find("sim"); it != j.end()) {
    detail::reject_unknown(*it, "sim", {"reoptimize_every", "initial_epoch_after"});
    if (auto r = it->find("reoptimize_every"); r != it->end() && r->is_string()) {
      if (r->get<std::string>() != "never") throw Error("config: 'sim.reoptimize_every' must be a count or \"never\"");
      c.reoptimize_every = kNeverReoptimize;
    } else {
      read(*it, "reoptimize_every", "sim", c.reoptimize_every);
    }
    read(*it, "initial_epoch_after", "sim", c.initial_epoch_after);
  }
  if (auto it = j.find("strategies"); it != j.end()) {
    if (!it->is_array()) throw Error("config: 'strategies' must be an array");
    c.strategies.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& s = (*it)[i];
      const std::string where = "strategies[" + std::to_string(i) + "]";
      detail::reject_unknown(s, where, {"kind", "weights"});
      if (!s.contains("kind")) throw Error("config: '" + where + ".kind' is required");
      std::string kind;
      read(s, "kind", where, kind);
      Strategy st;
      st.kind = parse_strategy_kind(kind);
      read(s, "weights", where, st.weights);
      c.strategies.push_back(std::move(st));
    }
  }
  c.validate();
  return c;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  try {
    return experiment_from_json(read_json_file(path));
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind(path.string(), 0) == 0) throw;
    throw Error(path.string() + ": " + what);
  }
}

}  // namespace tiersched
