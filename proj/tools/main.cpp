// SPDX-License-Identifier: Apache-2.0
//
// rssqp command-line harness: solve, bench, suite.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rssqp/bench.hpp"
#include "rssqp/suite.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct SolveArgs {
  std::string problem;
  double sigma = 0.0;
  int samples = 5000;
  int max_iters = -1;
  std::uint64_t seed = 20240101;
  bool deterministic = false;
  std::string hessian = "identity";
  bool trace = false;
};

struct BenchArgs {
  std::string config;
  std::vector<std::string> problems;
  std::vector<double> sigmas;
  std::vector<int> sample_sizes;
  std::vector<int> checkpoints;
  int trials = 20;
  std::uint64_t seed = 0;
  std::string out = "bench.csv";
  std::string format = "csv";
  int jobs = 0;
  bool independent_runs = false;
  bool wall_time = false;
};

rssqp::HessianPolicy parse_hessian(const std::string& s) {
  if (s == "identity") return rssqp::HessianPolicy::Identity;
  if (s == "damped-secant") return rssqp::HessianPolicy::DampedSecant;
  throw rssqp::InvalidArgument("unknown hessian policy '" + s + "'");
}

const char* stationarity_name(rssqp::Stationarity s) {
  switch (s) {
    case rssqp::Stationarity::KKT: return "KKT";
    case rssqp::Stationarity::FritzJohn: return "FritzJohn";
    case rssqp::Stationarity::InfeasibleStationary: return "InfeasibleStationary";
    case rssqp::Stationarity::None: return "None";
  }
  return "None";
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

int run_solve(const SolveArgs& a) {
  const rssqp::ProblemInstance prob = rssqp::build_adapted_problem(a.problem, a.sigma);
  rssqp::SolverConfig config;
  config.hessian = parse_hessian(a.hessian);
  config.sample_size = a.samples;
  config.record_trace = a.trace;
  config.max_iter = a.max_iters >= 0 ? a.max_iters : (a.deterministic ? 2000 : 5000);
  const auto t0 = std::chrono::steady_clock::now();
  rssqp::SolveResult res;
  if (a.deterministic) {
    res = rssqp::deterministic_sqp_solve(prob, config);
  } else {
    rssqp::StochasticRun run;
    run.seed = a.seed;
    run.key.problem = rssqp::fnv1a64(prob.name);
    res = rssqp::stochastic_sqp_solve(prob, config, run);
    res.classification = rssqp::classify_stationarity(prob, res.state.x, res.state.last_multipliers,
                                                      config.kkt_tol);
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (a.trace) {
    std::printf("%6s %12s %12s %12s %12s %12s %12s %3s\n", "k", "phi", "kappa", "rho", "|d|",
                "pred", "alpha", "acc");
    for (const auto& t : res.trace) {
      std::printf("%6d %12.5e %12.5e %12.5e %12.5e %12.5e %12.5e %3d\n", t.k, t.phi, t.kappa, t.rho,
                  t.d.norm(), t.pred, t.alpha, t.accepted ? 1 : 0);
    }
  }
  const rssqp::EvalPoint ep = rssqp::evaluate_constraints(prob, res.state.x);
  const auto chi = rssqp::optimality_chi(prob, res.state.x, std::nullopt, config).chi;
  const auto dist = rssqp::distance_to_solution_set(res.state.x, prob.solutions);

  std::cout << "problem        " << prob.name << "\n";
  std::cout << "mode           " << (a.deterministic ? "deterministic" : "stochastic") << "\n";
  std::cout << "iterations     " << res.state.k << "\n";
  std::cout << "accepted_steps " << res.state.accepted_steps << "\n";
  std::cout << "termination    " << rssqp::to_string(res.termination) << "\n";
  std::cout << "x              ";
  for (Eigen::Index i = 0; i < res.state.x.size(); ++i) std::cout << (i ? " " : "") << fmt(res.state.x[i]);
  std::cout << "\n";
  std::cout << "f              " << fmt(rssqp::true_objective(prob, res.state.x, 0.0).value) << "\n";
  std::cout << "phi            " << fmt(ep.phi) << "\n";
  std::cout << "chi            " << (chi ? fmt(*chi) : std::string("unavailable")) << "\n";
  std::cout << "dist           " << (dist ? fmt(dist->dist) : std::string("unavailable")) << "\n";
  std::cout << "log10_dist     " << (dist ? fmt(dist->log10_dist) : std::string("unavailable")) << "\n";
  std::cout << "rho            " << fmt(res.state.rho) << "\n";
  std::cout << "classification " << stationarity_name(res.classification) << "\n";
  std::cout << "wall_time_ms   " << fmt(ms) << "\n";
  if (!res.diagnostic.empty()) std::cout << "diagnostic     " << res.diagnostic << "\n";
  const bool failed = res.termination == rssqp::Termination::SubproblemFailure ||
                      res.termination == rssqp::Termination::LineSearchFailure;
  return failed ? kExitFailure : kExitOk;
}

int run_bench(const BenchArgs& a, const CLI::App& cmd) {
  rssqp::BenchFileConfig cfg;
  cfg.grid.problems = rssqp::list_suite();
  if (!a.config.empty()) {
    std::ifstream f(a.config);
    if (!f) throw rssqp::InvalidArgument("cannot open config file '" + a.config + "'");
    cfg = rssqp::parse_bench_config(f, cfg);
  }
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given("--problems")) cfg.grid.problems = a.problems;
  if (given("--sigmas")) cfg.grid.sigmas = a.sigmas;
  if (given("--sample-sizes")) cfg.grid.sample_sizes = a.sample_sizes;
  if (given("--checkpoints")) cfg.grid.checkpoints = a.checkpoints;
  if (given("--trials")) cfg.grid.trials = a.trials;
  if (given("--seed")) cfg.grid.master_seed = a.seed;
  if (given("--independent-runs")) cfg.grid.independent_runs = a.independent_runs;
  if (given("--wall-time")) cfg.grid.wall_time = a.wall_time;
  if (given("--out") || !cfg.out) cfg.out = a.out;
  if (given("--format") || !cfg.format) cfg.format = rssqp::parse_record_format(a.format);
  if (given("--jobs") || !cfg.jobs) cfg.jobs = a.jobs;
  cfg.grid.validate();

  rssqp::SolverConfig config;
  const auto records = rssqp::run_experiment_grid(cfg.grid, config, *cfg.jobs);
  rssqp::write_records(records, std::filesystem::path(*cfg.out), *cfg.format);
  std::size_t failed = 0;
  for (const auto& r : records) {
    if (r.error) {
      ++failed;
      std::cerr << "failed: " << r.problem << " sigma=" << r.sigma << " S=" << r.sample_size
                << " trial=" << r.trial << " k=" << r.checkpoint_iter << ": " << *r.error << "\n";
    }
  }
  std::cout << "wrote " << records.size() << " records to " << *cfg.out;
  if (failed) std::cout << " (" << failed << " failed)";
  std::cout << "\n";
  return failed ? kExitFailure : kExitOk;
}

int run_suite(bool manifest) {
  if (manifest) {
    std::cout << rssqp::suite_manifest_json();
    return kExitOk;
  }
  std::printf("%-6s %3s %3s %3s  %-20s %s\n", "id", "n", "m1", "m2", "adaptation", "f*");
  for (const auto& id : rssqp::list_suite()) {
    const auto spec = rssqp::adapted_problem_spec(id);
    std::printf("%-6s %3d %3d %3d  %-20s %.17g\n", id.c_str(), spec.n, spec.m1, spec.m2,
                rssqp::to_string(spec.adaptation), spec.optimal_value);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust stochastic SQP solver and benchmark harness", "rssqp"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve one suite problem");
  solve->add_option("--problem", sa.problem, "Suite problem id")->required();
  solve->add_option("--sigma", sa.sigma, "Noise level")->check(CLI::NonNegativeNumber);
  solve->add_option("--samples", sa.samples, "Sample size per estimate")->check(CLI::PositiveNumber);
  solve->add_option("--max-iters", sa.max_iters, "Iteration limit")->check(CLI::NonNegativeNumber);
  solve->add_option("--seed", sa.seed, "Master seed");
  solve->add_flag("--deterministic", sa.deterministic, "Exact f and grad f with backtracking");
  solve->add_option("--hessian", sa.hessian, "identity or damped-secant")
      ->check(CLI::IsMember({"identity", "damped-secant"}));
  solve->add_flag("--trace", sa.trace, "Print one line per iteration");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run the experiment grid");
  bench->add_option("--config", ba.config, "key = value config file (flags override)");
  bench->add_option("--problems", ba.problems, "Problem ids")->delimiter(',');
  bench->add_option("--sigmas", ba.sigmas, "Noise levels")->delimiter(',');
  bench->add_option("--sample-sizes", ba.sample_sizes, "Sample sizes")->delimiter(',');
  bench->add_option("--checkpoints", ba.checkpoints, "Checkpoint iterations")->delimiter(',');
  bench->add_option("--trials", ba.trials, "Trials per cell");
  bench->add_option("--seed", ba.seed, "Master seed");
  bench->add_option("--out", ba.out, "Output path");
  bench->add_option("--format", ba.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  bench->add_option("--jobs", ba.jobs, "Worker threads (default: RSSQP_JOBS or 1)");
  bench->add_flag("--independent-runs", ba.independent_runs, "One run per checkpoint tier");
  bench->add_flag("--wall-time", ba.wall_time, "Record measured wall time");

  bool manifest = false;
  auto* suite = app.add_subcommand("suite", "List suite problems");
  suite->add_flag("--manifest", manifest, "Print the JSON manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << app.help();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve) return run_solve(sa);
    if (*bench) return run_bench(ba, *bench);
    return run_suite(manifest);
  } catch (const rssqp::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
