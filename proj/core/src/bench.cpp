// SPDX-License-Identifier: Apache-2.0
#include "rssqp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rssqp/suite.hpp"

namespace rssqp {

void ExperimentGrid::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidArgument("experiment grid: " + msg); };
  if (problems.empty()) fail("no problems");
  if (sigmas.empty()) fail("no sigmas");
  if (sample_sizes.empty()) fail("no sample sizes");
  if (checkpoints.empty()) fail("no checkpoints");
  if (trials < 1) fail("trials must be >= 1");
  for (double s : sigmas) {
    if (!(s >= 0.0)) fail("sigmas must be >= 0");
  }
  for (int s : sample_sizes) {
    if (s < 1) fail("sample sizes must be >= 1");
  }
  if (checkpoints.front() < 0) fail("checkpoints must be >= 0");
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    if (checkpoints[i] <= checkpoints[i - 1]) fail("checkpoints must be strictly increasing");
  }
  const auto ids = list_suite();
  for (const auto& p : problems) {
    if (std::find(ids.begin(), ids.end(), p) == ids.end()) fail("unknown problem '" + p + "'");
  }
}

std::size_t ExperimentGrid::record_count() const {
  return problems.size() * sigmas.size() * sample_sizes.size() * static_cast<std::size_t>(trials) *
         checkpoints.size();
}

std::uint64_t trial_seed(std::uint64_t master_seed, const std::string& problem,
                         std::size_t sigma_index, std::size_t sample_index, int trial) {
  std::uint64_t s = master_seed ^ fnv1a64(problem);
  std::uint64_t out = splitmix64(s);
  s = out ^ (static_cast<std::uint64_t>(sigma_index) << 40) ^
      (static_cast<std::uint64_t>(sample_index) << 20) ^ static_cast<std::uint64_t>(trial);
  return splitmix64(s);
}

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  if (const char* env = std::getenv("RSSQP_JOBS")) {
    int v = 0;
    const std::string_view sv(env);
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec == std::errc() && ptr == sv.data() + sv.size() && v > 0) return v;
  }
  return 1;
}

namespace {

struct Task {
  std::size_t problem = 0;
  std::size_t sigma = 0;
  std::size_t sample = 0;
  int trial = 0;
  std::optional<std::size_t> tier;  // independent-runs mode only
};

TrialRecord base_record(const ExperimentGrid& grid, const Task& t, int checkpoint) {
  TrialRecord r;
  r.problem = grid.problems[t.problem];
  r.sigma = grid.sigmas[t.sigma];
  r.sample_size = grid.sample_sizes[t.sample];
  r.trial = t.trial;
  r.checkpoint_iter = checkpoint;
  r.seed = trial_seed(grid.master_seed, r.problem, t.sigma, t.sample, t.trial);
  return r;
}

void fill_measurements(TrialRecord& r, const ProblemInstance& prob, const SolverState& st,
                       const SolverConfig& config) {
  const EvalPoint ep = evaluate_constraints(prob, st.x);
  r.phi = ep.phi;
  const auto dist = distance_to_solution_set(st.x, prob.solutions);
  r.log10_dist = dist ? dist->log10_dist : std::numeric_limits<double>::quiet_NaN();
  r.chi = optimality_chi(prob, st.x, std::nullopt, config).chi;
  r.rho = st.rho;
  r.alpha = st.alpha;
  r.zeta = st.zeta;
  r.accepted_steps = st.accepted_steps;
}

// Runs one trajectory and records every requested checkpoint in `tiers`.
std::vector<TrialRecord> run_trajectory(const ExperimentGrid& grid, const SolverConfig& base,
                                        const Task& t, const std::vector<int>& tiers) {
  std::vector<TrialRecord> out;
  const auto start = std::chrono::steady_clock::now();
  const TrialRecord proto = base_record(grid, t, 0);
  std::size_t next = 0;
  try {
    const ProblemInstance prob = build_adapted_problem(proto.problem, proto.sigma);
    SolverConfig config = base;
    config.sample_size = proto.sample_size;
    config.max_iter = tiers.back();
    config.checkpoints.clear();
    config.record_trace = false;
    config.validate();
    StochasticRun run;
    run.seed = proto.seed;
    run.key.problem = fnv1a64(proto.problem);
    run.key.sigma_index = static_cast<std::uint32_t>(t.sigma);
    run.key.sample_index = static_cast<std::uint32_t>(t.sample);
    run.key.trial = static_cast<std::uint32_t>(t.trial);
    SolverState st = initial_state(prob, config);
    while (next < tiers.size()) {
      if (st.k == tiers[next]) {
        TrialRecord r = proto;
        r.checkpoint_iter = tiers[next];
        fill_measurements(r, prob, st, config);
        if (grid.wall_time) {
          r.wall_time_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start)
                               .count();
        }
        out.push_back(std::move(r));
        ++next;
        continue;
      }
      stochastic_sqp_step(st, prob, config, run, nullptr);
    }
  } catch (const std::exception& e) {
    for (; next < tiers.size(); ++next) {
      TrialRecord r = proto;
      r.checkpoint_iter = tiers[next];
      r.error = e.what();
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace

std::vector<TrialRecord> run_experiment_grid(const ExperimentGrid& grid, const SolverConfig& config,
                                             int jobs) {
  grid.validate();
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < grid.problems.size(); ++p) {
    for (std::size_t s = 0; s < grid.sigmas.size(); ++s) {
      for (std::size_t n = 0; n < grid.sample_sizes.size(); ++n) {
        for (int t = 0; t < grid.trials; ++t) {
          if (grid.independent_runs) {
            for (std::size_t c = 0; c < grid.checkpoints.size(); ++c) tasks.push_back({p, s, n, t, c});
          } else {
            tasks.push_back({p, s, n, t, std::nullopt});
          }
        }
      }
    }
  }
  std::vector<std::vector<TrialRecord>> results(tasks.size());
  auto work = [&](const Task& t) {
    if (t.tier) return run_trajectory(grid, config, t, {grid.checkpoints[*t.tier]});
    return run_trajectory(grid, config, t, grid.checkpoints);
  };
  const int workers = std::min<int>(resolve_jobs(jobs), static_cast<int>(tasks.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = work(tasks[i]);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = cursor++; i < tasks.size(); i = cursor++) results[i] = work(tasks[i]);
      });
    }
  }
  std::vector<TrialRecord> records;
  records.reserve(grid.record_count());
  for (auto& r : results) {
    for (auto& rec : r) records.push_back(std::move(rec));
  }
  return records;
}

RecordFormat parse_record_format(const std::string& s) {
  if (s == "csv") return RecordFormat::Csv;
  if (s == "json") return RecordFormat::Json;
  throw InvalidArgument("unknown record format '" + s + "' (expected csv or json)");
}

namespace {

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw InvalidArgument("bad number '" + s + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidArgument("bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

void write_records(const std::vector<TrialRecord>& records, std::ostream& out,
                   RecordFormat format) {
  if (format == RecordFormat::Csv) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
      out << r.problem << ',' << fmt17(r.sigma) << ',' << r.sample_size << ',' << r.trial << ','
          << r.checkpoint_iter << ',';
      if (r.error) {
        // Failed rows leave every measurement empty.
        out << ",,,,,,,,";
      } else {
        out << fmt17(r.log10_dist) << ',' << fmt17(r.phi) << ',' << (r.chi ? fmt17(*r.chi) : "")
            << ',' << fmt17(r.rho) << ',' << fmt17(r.alpha) << ',' << fmt17(r.zeta) << ','
            << r.accepted_steps << ',' << fmt17(r.wall_time_ms) << ',';
      }
      out << r.seed << '\n';
    }
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["problem"] = r.problem;
    j["sigma"] = r.sigma;
    j["sample_size"] = r.sample_size;
    j["trial"] = r.trial;
    j["checkpoint_iter"] = r.checkpoint_iter;
    const bool ok = !r.error;
    j["log10_dist"] = ok ? json_number(r.log10_dist) : nullptr;
    j["phi"] = ok ? json_number(r.phi) : nullptr;
    j["chi"] = ok && r.chi ? json_number(*r.chi) : nullptr;
    j["rho"] = ok ? json_number(r.rho) : nullptr;
    j["alpha"] = ok ? json_number(r.alpha) : nullptr;
    j["zeta"] = ok ? json_number(r.zeta) : nullptr;
    j["accepted_steps"] = ok ? nlohmann::ordered_json(r.accepted_steps) : nullptr;
    j["wall_time_ms"] = ok ? json_number(r.wall_time_ms) : nullptr;
    j["seed"] = r.seed;
    if (r.error) j["error"] = *r.error;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

void write_records(const std::vector<TrialRecord>& records, const std::filesystem::path& path,
                   RecordFormat format) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_records(records, f, format);
  f.flush();
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::vector<TrialRecord> parse_records(std::istream& in, RecordFormat format) {
  std::vector<TrialRecord> out;
  if (format == RecordFormat::Csv) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != kCsvHeader) {
      throw InvalidArgument("CSV header does not match the record schema");
    }
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto f = split(trim(line), ',');
      if (f.size() != 14) throw InvalidArgument("CSV row has " + std::to_string(f.size()) + " fields");
      TrialRecord r;
      r.problem = f[0];
      r.sigma = parse_double(f[1]);
      r.sample_size = parse_int<int>(f[2]);
      r.trial = parse_int<int>(f[3]);
      r.checkpoint_iter = parse_int<int>(f[4]);
      if (f[5].empty()) {
        r.error = "failed";
      } else {
        r.log10_dist = parse_double(f[5]);
        r.phi = parse_double(f[6]);
        if (!f[7].empty()) r.chi = parse_double(f[7]);
        r.rho = parse_double(f[8]);
        r.alpha = parse_double(f[9]);
        r.zeta = parse_double(f[10]);
        r.accepted_steps = parse_int<int>(f[11]);
        r.wall_time_ms = parse_double(f[12]);
      }
      r.seed = parse_int<std::uint64_t>(f[13]);
      out.push_back(std::move(r));
    }
    return out;
  }
  const auto arr = nlohmann::json::parse(in);
  auto num = [](const nlohmann::json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  for (const auto& j : arr) {
    TrialRecord r;
    r.problem = j.at("problem").get<std::string>();
    r.sigma = j.at("sigma").get<double>();
    r.sample_size = j.at("sample_size").get<int>();
    r.trial = j.at("trial").get<int>();
    r.checkpoint_iter = j.at("checkpoint_iter").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("error")) {
      r.error = j.at("error").get<std::string>();
    } else {
      r.log10_dist = num(j.at("log10_dist"));
      r.phi = num(j.at("phi"));
      if (!j.at("chi").is_null()) r.chi = j.at("chi").get<double>();
      r.rho = num(j.at("rho"));
      r.alpha = num(j.at("alpha"));
      r.zeta = num(j.at("zeta"));
      r.accepted_steps = j.at("accepted_steps").get<int>();
      r.wall_time_ms = num(j.at("wall_time_ms"));
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("config key '" + key + "': expected a boolean, got '" + v + "'");
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& v, F conv) {
  std::vector<T> out;
  for (const auto& item : split(v, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(conv(t));
  }
  return out;
}

}  // namespace

BenchFileConfig parse_bench_config(std::istream& in, const BenchFileConfig& base) {
  BenchFileConfig cfg = base;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    try {
      if (key == "problems") {
        cfg.grid.problems = parse_list<std::string>(value, [](const std::string& s) { return s; });
      } else if (key == "sigmas") {
        cfg.grid.sigmas = parse_list<double>(value, parse_double);
      } else if (key == "sample-sizes") {
        cfg.grid.sample_sizes = parse_list<int>(value, parse_int<int>);
      } else if (key == "checkpoints") {
        cfg.grid.checkpoints = parse_list<int>(value, parse_int<int>);
      } else if (key == "trials") {
        cfg.grid.trials = parse_int<int>(value);
      } else if (key == "seed") {
        cfg.grid.master_seed = parse_int<std::uint64_t>(value);
      } else if (key == "independent-runs") {
        cfg.grid.independent_runs = parse_bool(value, key);
      } else if (key == "wall-time") {
        cfg.grid.wall_time = parse_bool(value, key);
      } else if (key == "out") {
        cfg.out = value;
      } else if (key == "format") {
        cfg.format = parse_record_format(value);
      } else if (key == "jobs") {
        cfg.jobs = parse_int<int>(value);
      } else {
        throw InvalidArgument("unknown key '" + key + "'");
      }
    } catch (const std::exception& e) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

}  // namespace rssqp
