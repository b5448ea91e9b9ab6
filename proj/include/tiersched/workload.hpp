#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tiersched/model.hpp"
#include "tiersched/rng.hpp"

namespace tiersched {

struct WorkloadConfig {
  double arrival_rate = 2.4;
  std::vector<double> service_rates{1.0, 1.0};  // one per tier
  std::size_t num_jobs = 200;
  std::uint64_t seed = 1;

  std::size_t num_tiers() const { return service_rates.size(); }

  void validate() const {
    if (!(arrival_rate > 0.0) || !std::isfinite(arrival_rate)) throw Error("workload: arrival_rate must be > 0");
    if (service_rates.empty()) throw Error("workload: at least one tier is required");
    for (auto mu : service_rates)
      if (!(mu > 0.0) || !std::isfinite(mu)) throw Error("workload: service rates must be > 0");
    if (num_jobs == 0) throw Error("workload: num_jobs must be >= 1");
  }

  bool operator==(const WorkloadConfig&) const = default;
};

/// Poisson arrivals and exponential per-tier execution times. Job ids follow
/// arrival order; only the tier-0 arrival is set, later tiers are filled in by
/// the simulator.
inline std::vector<Job> generate(const WorkloadConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t tiers = config.num_tiers();
  std::vector<Job> jobs;
  jobs.reserve(config.num_jobs);
  double clock = 0.0;
  for (std::size_t i = 0; i < config.num_jobs; ++i) {
    double next = clock + rng.exponential(config.arrival_rate);
    while (next <= clock) next += rng.exponential(config.arrival_rate);
    clock = next;
    Job job;
    job.id = static_cast<JobId>(i);
    job.arrivals.assign(tiers, 0.0);
    job.arrivals[0] = clock;
    job.departures.assign(tiers, std::nullopt);
    job.waits.assign(tiers, std::nullopt);
    job.exec_times.resize(tiers);
    for (std::size_t j = 0; j < tiers; ++j) {
      double e = rng.exponential(config.service_rates[j]);
      while (!(e > 0.0)) e = rng.exponential(config.service_rates[j]);
      job.exec_times[j] = e;
    }
    jobs.push_back(std::move(job));
  }
  return jobs;
}

class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), source_(std::move(source)), line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// Fixture text format (one tier snapshot, 1-based indices):
//
//   # comment
//   tier <j> queues <M>
//   queue <k> busy <t> jobs <id:exec,id:exec,...>
//
// Queue lines appear in order k = 1..M; an empty queue ends after `jobs`.
inline std::string save_fixture(const TierSnapshot& snapshot) {
  snapshot.validate();
  std::string out = "tier " + std::to_string(snapshot.tier_index + 1) + " queues " +
                    std::to_string(snapshot.num_queues()) + "\n";
  for (std::size_t k = 0; k < snapshot.num_queues(); ++k) {
    out += "queue " + std::to_string(k + 1) + " busy " + format_number(snapshot.busy_until[k]) + " jobs";
    const auto& q = snapshot.queues[k];
    for (std::size_t p = 0; p < q.size(); ++p) {
      out += p == 0 ? " " : ",";
      out += std::to_string(q[p]) + ":" + format_number(snapshot.exec_of.at(q[p]));
    }
    out += "\n";
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
std::optional<T> parse_num(std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

inline TierSnapshot parse_fixture(std::string_view text, const std::string& source = "<fixture>") {
  TierSnapshot snap;
  std::size_t expected_queues = 0;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t last_line = 0;
  auto fail = [&](const std::string& what) { throw ParseError(source, line_no, what); };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens[0].starts_with('#')) {
      if (nl == text.size()) break;
      continue;
    }
    last_line = line_no;

    if (!have_header) {
      if (tokens.size() != 4 || tokens[0] != "tier" || tokens[2] != "queues")
        fail("expected header 'tier <j> queues <M>'");
      auto tier = detail::parse_num<std::size_t>(tokens[1]);
      auto m = detail::parse_num<std::size_t>(tokens[3]);
      if (!tier || *tier == 0) fail("tier index must be a positive integer");
      if (!m || *m == 0) fail("queue count must be a positive integer");
      snap.tier_index = *tier - 1;
      expected_queues = *m;
      have_header = true;
    } else {
      if (tokens.size() < 5 || tokens.size() > 6 || tokens[0] != "queue" || tokens[2] != "busy" || tokens[4] != "jobs")
        fail("expected 'queue <k> busy <t> jobs <id:exec,...>'");
      auto k = detail::parse_num<std::size_t>(tokens[1]);
      if (!k || *k != snap.queues.size() + 1)
        fail("queue index must be " + std::to_string(snap.queues.size() + 1));
      if (*k > expected_queues) fail("more queue lines than the header declares");
      auto busy = detail::parse_num<double>(tokens[3]);
      if (!busy || !(*busy >= 0.0) || !std::isfinite(*busy)) fail("field 'busy' must be a finite number >= 0");
      snap.busy_until.push_back(*busy);
      std::vector<JobId> queue;
      if (tokens.size() == 6) {
        std::string_view list = tokens[5];
        std::size_t start = 0;
        while (start <= list.size()) {
          auto comma = list.find(',', start);
          if (comma == std::string_view::npos) comma = list.size();
          auto item = list.substr(start, comma - start);
          auto colon = item.find(':');
          if (colon == std::string_view::npos) fail("job entry '" + std::string(item) + "' is not 'id:exec'");
          auto id = detail::parse_num<JobId>(item.substr(0, colon));
          auto exec = detail::parse_num<double>(item.substr(colon + 1));
          if (!id) fail("job id in '" + std::string(item) + "' is not an integer");
          if (!exec || !(*exec > 0.0) || !std::isfinite(*exec))
            fail("execution time in '" + std::string(item) + "' must be a positive number");
          if (!snap.exec_of.emplace(*id, *exec).second) fail("job " + std::to_string(*id) + " appears twice");
          queue.push_back(*id);
          start = comma + 1;
        }
      }
      snap.queues.push_back(std::move(queue));
    }
    if (nl == text.size()) break;
  }
  line_no = last_line;
  if (!have_header) fail("missing 'tier <j> queues <M>' header");
  if (snap.queues.size() != expected_queues)
    fail("header declares " + std::to_string(expected_queues) + " queues but " + std::to_string(snap.queues.size()) +
         " were given");
  snap.validate();
  return snap;
}

inline TierSnapshot load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open fixture " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_fixture(ss.str(), path.string());
}

inline void write_fixture(const std::filesystem::path& path, const TierSnapshot& snapshot,
                          std::string_view header_comment = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write fixture " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << save_fixture(snapshot);
  if (!out) throw Error("failed writing fixture " + path.string());
}

}  // namespace tiersched
