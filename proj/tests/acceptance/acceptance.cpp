// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one "PASS criterion N: ..." or "FAIL criterion N: ..."
// line per criterion; `--only N` runs a single criterion.
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "random_instances.hpp"
#include "rssqp/bench.hpp"
#include "rssqp/merit.hpp"
#include "rssqp/sqp.hpp"
#include "rssqp/suite.hpp"

using namespace rssqp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

int hardware_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

StochasticRun run_for(const ProblemInstance& p, std::uint64_t seed) {
  StochasticRun r;
  r.seed = seed;
  r.key.problem = fnv1a64(p.name);
  return r;
}

// Largest ||grad(a) - grad(b)|| / ||a - b|| over a grid on the segment [x, x + d].
double segment_lipschitz(const std::function<Matrix(const Vector&)>& grad, const Vector& x,
                         const Vector& d, int points = 21) {
  std::vector<Vector> xs;
  std::vector<Matrix> gs;
  for (int i = 0; i < points; ++i) {
    xs.push_back(x + (static_cast<double>(i) / (points - 1)) * d);
    gs.push_back(grad(xs.back()));
  }
  double L = 0.0;
  for (int i = 0; i < points; ++i) {
    for (int j = i + 1; j < points; ++j) {
      const double dx = (xs[i] - xs[j]).norm();
      if (dx <= 0.0) continue;
      for (Eigen::Index c = 0; c < gs[i].cols(); ++c) {
        L = std::max(L, (gs[i].col(c) - gs[j].col(c)).norm() / dx);
      }
    }
  }
  return L;
}

double constraint_lipschitz(const ProblemInstance& p, const Vector& x, const Vector& d) {
  double L = 0.0;
  if (p.m1 > 0) L = std::max(L, segment_lipschitz(p.eq.gradient, x, d));
  if (p.m2 > 0) L = std::max(L, segment_lipschitz(p.ineq.gradient, x, d));
  return L;
}

double objective_lipschitz(const ProblemInstance& p, const Vector& x, const Vector& d) {
  return segment_lipschitz(
      [&](const Vector& z) { return Matrix(true_objective(p, z, 0.0).gradient); }, x, d);
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(20240601);
  int qp_bad = 0;
  double qp_worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    Vector start;
    const DirectionQpData q = test::random_direction_qp(gen, {4, 3}, &start);
    const SubproblemSolution s = solve_direction_qp(q, start);
    const SubproblemSolution ref = brute_force_qp_oracle(q);
    if (s.status != SolveStatus::Optimal || ref.status != SolveStatus::Optimal) {
      ++qp_bad;
      continue;
    }
    const double rel = std::abs(s.objective_value - ref.objective_value) /
                       (1.0 + std::abs(ref.objective_value));
    qp_worst = std::max(qp_worst, rel);
    if (rel > 1e-8) ++qp_bad;
  }
  int lp_bad = 0;
  double lp_worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const DistanceLpData d = test::random_distance_lp(gen, {4, 3});
    const SubproblemSolution s = solve_distance_lp(d);
    const auto ref = test::distance_lp_oracle(d);
    if (s.status != SolveStatus::Optimal || !ref.feasible) {
      ++lp_bad;
      continue;
    }
    const double err = std::abs(s.objective_value - ref.objective);
    lp_worst = std::max(lp_worst, err);
    if (err > 1e-8) ++lp_bad;
  }
  const double secs = seconds_since(t0);
  return {qp_bad == 0 && lp_bad == 0 && secs < 10.0,
          format("500 QPs: %d mismatches (worst rel %.2e); 200 LPs: %d mismatches (worst %.2e); "
                 "%.2f s (limit 10 s)",
                 qp_bad, qp_worst, lp_bad, lp_worst, secs)};
}

Outcome criterion_2() {
  const auto t0 = Clock::now();
  std::vector<std::string> failures;
  for (const auto& id : list_suite()) {
    const ProblemInstance p = build_adapted_problem(id, 0.0);
    SolverConfig c;
    c.max_iter = 2000;
    const SolveResult r = deterministic_sqp_solve(p, c);
    const double dist = distance_to_solution_set(r.state.x, p.solutions)->dist;
    const double resid = kkt_residuals(p, r.state.x, r.state.last_multipliers).max();
    const bool hs06 = id == "HS06";
    const bool ok = dist <= (hs06 ? 1e-6 : 1e-4) && (!hs06 || r.state.k <= 200) &&
                    r.classification == Stationarity::KKT && resid <= 1e-6;
    if (!ok) {
      failures.push_back(format("%s(k=%d dist=%.1e class=%s resid=%.1e)", id.c_str(), r.state.k,
                                dist, to_string(r.classification), resid));
    }
  }
  const double secs = seconds_since(t0);
  std::string detail = format("%zu/%zu problems converged to KKT; %.2f s (limit 60 s)",
                              list_suite().size() - failures.size(), list_suite().size(), secs);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty() && secs < 60.0, detail};
}

Outcome criterion_3() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(20240603);
  std::uniform_real_distribution<double> expo(-12.0, 2.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    MeritContext ctx;
    ctx.delta_phi = std::pow(10.0, expo(gen));
    ctx.rho = std::pow(10.0, expo(gen) + 4.0);
    ctx.g_dot_d = nd(gen) * std::pow(10.0, 3.0 * nd(gen));
    ctx.dHd = std::abs(nd(gen)) * std::pow(10.0, 3.0 * nd(gen));
    ctx.rho = update_penalty(ctx);
    if (predicted_reduction(ctx) < 0.5 * ctx.dHd) ++violations;
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 1.0,
          format("10000 random updates, %d with pred < dHd/2; %.3f s (limit 1 s)", violations, secs)};
}

Outcome criterion_4() {
  int checks = 0, violations = 0;
  std::string worst;
  double worst_excess = -1.0;
  for (const char* id : {"HS06", "HS31", "HS63"}) {
    const ProblemInstance p = build_adapted_problem(id, 1.0);
    SolverConfig c;
    c.sample_size = 500;
    c.max_iter = 400;
    const SolveResult r = stochastic_sqp_solve(p, c, run_for(p, 4));
    std::vector<const TraceEntry*> fresh;
    for (const auto& te : r.trace)
      if (te.fresh && te.d.norm() > 0.0) fresh.push_back(&te);
    if (fresh.size() < 50) return {false, format("%s produced only %zu iterates", id, fresh.size())};
    for (int s = 0; s < 50; ++s) {
      const TraceEntry& te = *fresh[s * fresh.size() / 50];
      const double L = 1.5 * constraint_lipschitz(p, te.x, te.d);
      const double dn2 = te.d.squaredNorm();
      for (double alpha : {1.0, 0.5, 0.25, 0.125}) {
        const double lhs = evaluate_constraints(p, te.x + alpha * te.d).phi;
        const double rhs = te.phi - alpha * te.delta_phi + 0.5 * L * alpha * alpha * dn2;
        const double excess = lhs - rhs - 1e-12 * (1.0 + te.phi);
        ++checks;
        if (excess > 0.0) ++violations;
        if (excess > worst_excess) {
          worst_excess = excess;
          worst = format("%s k=%d alpha=%g", id, te.k, alpha);
        }
      }
    }
  }
  return {violations == 0,
          format("%d checks on 3 problems x 50 iterates x 4 step sizes, %d violations "
                 "(largest lhs - rhs = %.2e at %s)",
                 checks, violations, worst_excess, worst.c_str())};
}

Outcome criterion_5() {
  const auto ids = list_suite();
  std::mt19937_64 gen(20240605);
  std::normal_distribution<double> nd(0.0, 1.0);
  int accepted = 0, trials = 0;
  double min_alpha = HUGE_VAL;
  std::vector<std::string> rejected;
  SolverConfig c;
  while (trials < 100) {
    const std::string& id = ids[static_cast<std::size_t>(trials) % ids.size()];
    const ProblemInstance p = build_adapted_problem(id, 0.0);
    SolverState st = initial_state(p, c);
    for (Eigen::Index i = 0; i < st.x.size(); ++i) st.x[i] += 0.3 * nd(gen);
    const StochasticRun run = run_for(p, 1);
    // Probe with a negligible step to read d and the updated penalty.
    SolverState probe = st;
    probe.alpha = 1e-300;
    std::vector<TraceEntry> trace;
    try {
      stochastic_sqp_step(probe, p, c, run, &trace);
    } catch (const SolverFailure&) {
      continue;
    }
    const TraceEntry& te = trace.back();
    const double dn2 = te.d.squaredNorm();
    if (dn2 <= 1e-20) continue;
    const double lam = Eigen::SelfAdjointEigenSolver<Matrix>(te.H).eigenvalues().minCoeff();
    const double xi = std::min(0.5 * lam, te.pred / dn2);
    if (!(xi > 0.0)) continue;
    const double Lf = 1.5 * objective_lipschitz(p, te.x, te.d);
    const double Lhc = 1.5 * constraint_lipschitz(p, te.x, te.d);
    const double denom = 0.5 * Lf + 0.5 * te.rho * Lhc;
    const double threshold = denom > 0.0 ? (1.0 - c.theta) * xi / denom : HUGE_VAL;
    const double alpha = std::min(0.9 * threshold, 1.0);
    min_alpha = std::min(min_alpha, alpha);
    st.alpha = alpha;
    trace.clear();
    stochastic_sqp_step(st, p, c, run, &trace);
    ++trials;
    if (trace.back().accepted) {
      ++accepted;
    } else if (rejected.size() < 5) {
      rejected.push_back(format("%s alpha=%.2e", id.c_str(), alpha));
    }
  }
  std::string detail = format("%d/%d exact-mode steps below the threshold accepted (smallest alpha %.2e)",
                              accepted, trials, min_alpha);
  for (const auto& r : rejected) detail += "; rejected " + r;
  return {accepted == 100, detail};
}

Outcome criterion_6() {
  std::string detail;
  bool pass = true;

  // Penalty boundedness on noise-free runs.
  int worst_last = 0;
  std::string worst_id;
  std::vector<std::string> bad;
  for (const auto& id : list_suite()) {
    const ProblemInstance p = build_adapted_problem(id, 0.0);
    SolverConfig c;
    c.max_iter = 1000;
    try {
      const SolveResult r = stochastic_sqp_solve(p, c, run_for(p, 1));
      int last = 0;
      for (const auto& te : r.trace)
        if (te.rho != te.rho_before) last = te.k + 1;
      if (last > worst_last) {
        worst_last = last;
        worst_id = id;
      }
      if (last > 50) bad.push_back(format("%s(last change k=%d)", id.c_str(), last));
    } catch (const SolverFailure& e) {
      bad.push_back(id + "(" + e.what() + ")");
    }
  }
  pass = pass && bad.empty();
  detail += format("rho constant after k=%d at worst (%s) on %zu problems",
                   worst_last, worst_id.empty() ? "none" : worst_id.c_str(), list_suite().size());
  for (const auto& b : bad) detail += "; " + b;

  // Injected gradient spikes: single iterations evaluated at an enormous noise level.
  {
    SolverConfig c;
    const ProblemInstance p = build_adapted_problem("HS06", 1.0);
    SolverState st = initial_state(p, c);
    const StochasticRun run = run_for(p, 6);
    int triggers = 0, consistent = 0, spikes = 0;
    for (int k = 0; k < 600; ++k) {
      const bool spike = k > 0 && k % 100 == 0;
      ProblemInstance noisy = p;
      if (spike) noisy.sigma = 1e6 * std::pow(100.0, spikes++);
      const double zeta_before = st.zeta;
      const int j_before = st.j;
      const double p_g_before = st.p_g;
      std::vector<TraceEntry> trace;
      stochastic_sqp_step(st, spike ? noisy : p, c, run, &trace);
      if (!trace.back().safeguard_triggered) continue;
      ++triggers;
      const bool grew = st.zeta >= zeta_before + c.zeta_c && st.zeta >= trace.back().g_norm;
      const bool advanced = st.j == j_before + 1 && st.p_g == safeguard_probability(j_before, c.p0_g) &&
                            st.p_g > p_g_before;
      if (spike && grew && advanced) ++consistent;
    }
    const bool ok = triggers == spikes && consistent == spikes;
    pass = pass && ok;
    detail += format("; %d spikes, %d safeguard triggers, %d with zeta growth and p_g advance",
                     spikes, triggers, consistent);
  }

  // Schedule summability.
  {
    const double a0 = 0.9;
    const double bound = (1.0 - a0) * std::numbers::pi * std::numbers::pi / 6.0 + 1e-12;
    double sum = 0.0, prev = a0;
    bool ok = true;
    for (int j = 1; j <= 1000000; ++j) {
      const double a = safeguard_probability(j, a0);
      ok = ok && a >= prev && a < 1.0;
      prev = a;
      sum += 1.0 - a;
      ok = ok && sum <= bound;
    }
    pass = pass && ok;
    detail += format("; sum of (1 - a_j) over 1e6 terms = %.12f <= %.12f", sum, bound);
  }
  return {pass, detail};
}

Outcome criterion_7() {
  const auto t0 = Clock::now();
  SolverConfig config;
  std::string detail;

  ExperimentGrid trend;
  trend.problems = {"HS06"};
  trend.sigmas = {1.0};
  trend.sample_sizes = {5000};
  trend.checkpoints = {10, 1000};
  trend.trials = 20;
  const auto recs = run_experiment_grid(trend, config, hardware_jobs());
  std::vector<double> at10, at1000;
  int failed = 0;
  for (const auto& r : recs) {
    if (r.error) {
      ++failed;
      continue;
    }
    (r.checkpoint_iter == 10 ? at10 : at1000).push_back(r.log10_dist);
  }
  bool trend_ok = failed == 0 && !at10.empty() && !at1000.empty();
  double m10 = NAN, m1000 = NAN;
  if (trend_ok) {
    m10 = quantile(at10, 0.5);
    m1000 = quantile(at1000, 0.5);
    trend_ok = m1000 <= m10 - 1.0;
  }
  detail += format("HS06 median log10 dist %.3f at k=10 vs %.3f at k=1000 (need drop >= 1)", m10, m1000);

  ExperimentGrid spread;
  spread.problems = list_suite();
  spread.sigmas = {1.0};
  spread.sample_sizes = {500, 100000};
  spread.checkpoints = {5000};
  spread.trials = 20;
  const auto srecs = run_experiment_grid(spread, config, hardware_jobs());
  std::map<std::string, std::map<int, std::vector<double>>> groups;
  int sfailed = 0;
  for (const auto& r : srecs) {
    if (r.error) {
      ++sfailed;
      continue;
    }
    groups[r.problem][r.sample_size].push_back(r.log10_dist);
  }
  int hits = 0;
  std::string table;
  for (const auto& id : spread.problems) {
    auto& g = groups[id];
    if (g[500].size() < 2 || g[100000].size() < 2) {
      table += " " + id + "=n/a";
      continue;
    }
    const double iqr_small = quantile(g[500], 0.75) - quantile(g[500], 0.25);
    const double iqr_large = quantile(g[100000], 0.75) - quantile(g[100000], 0.25);
    const bool ok = iqr_large <= iqr_small;
    hits += ok;
    table += format(" %s=%.2f/%.2f%s", id.c_str(), iqr_large, iqr_small, ok ? "" : "*");
  }
  const bool spread_ok = hits >= 9;
  const double secs = seconds_since(t0);
  detail += format("; IQR(S=1e5) <= IQR(S=500) at k=5000 on %d/12 problems (need 9; %d failed rows):%s",
                   hits, sfailed, table.c_str());
  detail += format("; %.1f s (limit 600 s)", secs);
  return {trend_ok && spread_ok && secs < 600.0, detail};
}

Outcome criterion_8() {
  ExperimentGrid g;
  g.problems = {"HS06", "HS31", "S316"};
  g.sigmas = {1.0, 0.1};
  g.sample_sizes = {50, 5000};
  g.checkpoints = {10, 50, 200};
  g.trials = 3;
  g.master_seed = 987654321;
  const auto dir = std::filesystem::temp_directory_path() / "rssqp_acceptance_c8";
  std::filesystem::create_directories(dir);
  const int jobs[] = {1, hardware_jobs() > 1 ? hardware_jobs() : 4, 1};
  std::vector<std::string> bytes;
  for (int i = 0; i < 3; ++i) {
    const auto path = dir / format("run%d.csv", i);
    write_records(run_experiment_grid(g, SolverConfig{}, jobs[i]), path, RecordFormat::Csv);
    std::ifstream in(path, std::ios::binary);
    bytes.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::filesystem::remove_all(dir);
  const bool same = bytes[0] == bytes[1] && bytes[1] == bytes[2] && !bytes[0].empty();
  return {same, format("3 runs (jobs %d, %d, %d) of a %zu-record grid: %s (%zu bytes)", jobs[0], jobs[1],
                       jobs[2], g.record_count(), same ? "byte-identical" : "outputs differ",
                       bytes[0].size())};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }
  const std::function<Outcome()> criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                                               criterion_5, criterion_6, criterion_7, criterion_8};
  int failures = 0;
  for (int n = 1; n <= 8; ++n) {
    if (only != 0 && only != n) continue;
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
