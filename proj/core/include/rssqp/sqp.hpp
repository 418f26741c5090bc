// SPDX-License-Identifier: Apache-2.0
//
// Robust SQP drivers.
//
// Each iteration first solves the l-infinity distance LP inside the box
// ||p||_inf <= sigma_k = min{sigma_u, kappa_u phi_k}; its optimum kappa_k relaxes
// the linearized constraints of the direction QP so the QP is always
// consistent. The step is globalized with the exact penalty
// Psi(x; rho) = f(x) + rho phi(x).
//
// deterministic_sqp_solve uses exact f and grad f and a backtracking line search
// restarted from alpha = 1 at every iteration.
//
// stochastic_sqp_solve samples g_k, f_k^0 and f_k^s, keeps the step size across
// iterations (alpha <- min{gamma alpha, alpha_max} on success, alpha / gamma on
// failure), reuses the distance-phase data and H_k after a rejected step, and
// guards the gradient norm with zeta_k: each time ||g_k|| exceeds zeta_k the
// target accuracy probability p^g advances along a_j.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rssqp/hessian.hpp"
#include "rssqp/oracle.hpp"
#include "rssqp/problem.hpp"
#include "rssqp/rng.hpp"
#include "rssqp/subproblems.hpp"

namespace rssqp {

enum class StepRule {
  Backtracking,  // restart at alpha = 1 each iteration and backtrack until accepted
  Persistent,    // one trial per iteration with the stochastic step-size dynamics
};

struct SolverConfig {
  double sigma_u = 1e6;
  double beta_l = 100.0;
  double beta_u = 500.0;
  double beta_k = 100.0;
  double kappa_u = 2.0;
  double rho_0 = 10.0;
  double alpha_0 = 1.0;
  double alpha_max = 2.0;
  double gamma = 2.0;
  double theta = 0.1;

  int max_iter = 5000;
  std::vector<int> checkpoints;

  // Gradient-norm safeguard and accuracy schedule a_j = 1 - (1 - a_0) / (j + 1)^2.
  double zeta_0 = 1e3;
  double zeta_c = 1.0;
  double p0_g = 0.9;

  HessianPolicy hessian = HessianPolicy::Identity;
  double hessian_xi = 1e-3;
  double hessian_max = 1e4;

  // Sampling. Fixed |S^g| = |S^f| = sample_size unless adaptive_sampling is set.
  int sample_size = 5000;
  SamplingMode sampling_mode = SamplingMode::Aggregate;
  bool adaptive_sampling = false;
  double kappa_g = 1.0;
  double eps_f = 1.0;
  double p_f = 0.9;
  double sample_c_scale = 1.0;
  int max_sample_size = kDefaultMaxSampleSize;

  double zeta_r = kDefaultRegularization;

  // Deterministic driver.
  StepRule step_rule = StepRule::Backtracking;
  int max_backtracks = 60;
  double infeasible_step_tol = 1e-10;
  double kkt_step_tol = 1e-8;
  double kkt_phi_tol = 1e-8;
  double kkt_tol = kDefaultKktTolerance;
  // Stop once the predicted reduction is below what the merit comparison can resolve.
  double merit_resolution = 1e-14;

  // Enforce 0 < 2 sigma_u < beta_l <= beta_k <= beta_u; otherwise sigma_k is
  // additionally capped at beta_k so the distance step stays QP-feasible.
  bool strict_theory = false;
  bool record_trace = true;

  /// Throws InvalidArgument on inconsistent parameters.
  void validate() const;
};

/// a_j for the safeguard schedule.
double safeguard_probability(int j, double a0);

/// Snapshot of the iterate after `k` iterations.
struct Checkpoint {
  int k = 0;
  Vector x;
  double phi = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  double zeta = 0.0;
  double p_g = 0.0;
  int accepted_steps = 0;
};

struct TraceEntry {
  int k = 0;
  Vector x;
  bool fresh = false;  // subproblem data recomputed this iteration
  double phi = 0.0;
  double sigma_k = 0.0;
  double kappa = 0.0;
  double delta_phi = 0.0;
  Vector p;
  Matrix H;
  Vector g;
  Vector d;
  double g_norm = 0.0;
  bool safeguard_triggered = false;
  double zeta = 0.0;  // after the safeguard
  double p_g = 0.0;
  int j = 0;
  double rho_before = 0.0;
  double rho = 0.0;  // after the penalty update
  bool degenerate_penalty = false;
  double g_dot_d = 0.0;
  double dHd = 0.0;
  double pred = 0.0;
  double alpha = 0.0;  // step size tried
  double psi0 = 0.0;
  double psis = 0.0;
  bool accepted = false;
  int gradient_samples = 0;
  int function_samples = 0;
  bool regularized_fallback = false;
};

struct SolverState {
  int k = 0;
  Vector x;
  double alpha = 1.0;
  double rho = 10.0;
  double zeta = 1e3;
  double p_g = 0.9;
  int j = 1;

  // Distance-phase data and H_k, valid while `fresh` is false.
  bool fresh = true;
  EvalPoint eval;
  double sigma_k = 0.0;
  double kappa = 0.0;
  double delta_phi = 0.0;
  Vector p;
  Matrix H;

  Vector eta;     // equality multiplier estimate
  Vector nu_hat;  // inequality multiplier estimate
  bool last_success = false;
  int accepted_steps = 0;
  int penalty_increases = 0;
  int degenerate_updates = 0;
  int safeguard_triggers = 0;
  int regularized_fallbacks = 0;
  double last_d_norm = 1.0;

  // Secant history: iterate, gradient estimate and Jacobians that produced the last accepted step.
  std::optional<Vector> secant_x;
  Vector secant_g;
  Matrix secant_grad_h;
  Matrix secant_grad_c;
  // Most recent QP multipliers, for classification.
  Multipliers last_multipliers;
};

/// A subproblem solve failed beyond the regularized fallback.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Initial state from x0 with the configured parameters.
SolverState initial_state(const ProblemInstance& prob, const SolverConfig& config);

enum class Termination {
  Stationary,            // KKT / Fritz-John exit
  InfeasibleStationary,  // distance step vanished with phi > 0
  MaxIterations,
  LineSearchFailure,
  SubproblemFailure,
};

const char* to_string(Termination t);

struct SolveResult {
  SolverState state;
  Stationarity classification = Stationarity::None;
  Termination termination = Termination::MaxIterations;
  std::vector<TraceEntry> trace;
  std::vector<Checkpoint> checkpoints;
  std::string diagnostic;
};

/// Distance phase at the state's current x: fills eval, sigma_k, kappa, delta_phi, p.
void refresh_distance_phase(SolverState& state, const ProblemInstance& prob,
                            const SolverConfig& config);

/// H_k from the state's secant history and the current gradient estimate.
Matrix hessian_policy_update(const SolverState& state, const Vector& g_current,
                             const SolverConfig& config);

SolveResult deterministic_sqp_solve(const ProblemInstance& prob, const SolverConfig& config);

/// Sampling context of one stochastic run.
struct StochasticRun {
  std::uint64_t seed = 0;
  StreamKey key;  // iteration and purpose are filled in per draw
};

/// One loop body of the stochastic method. Throws SolverFailure when a
/// subproblem cannot be solved.
void stochastic_sqp_step(SolverState& state, const ProblemInstance& prob,
                         const SolverConfig& config, const StochasticRun& run,
                         std::vector<TraceEntry>* trace = nullptr);

/// Runs max_iter steps, snapshotting every configured checkpoint and k = 0.
SolveResult stochastic_sqp_solve(const ProblemInstance& prob, const SolverConfig& config,
                                 const StochasticRun& run);

struct OptimalityMeasure {
  std::optional<double> chi;
  std::optional<double> chi_g;
};

/// chi = -min{grad f' t : grad_h' t = 0, grad_c' t <= 0, ||t||_inf <= beta_l / 2},
/// and chi_g the same with `g_opt` in place of grad f. Failures leave the field empty.
OptimalityMeasure optimality_chi(const ProblemInstance& prob, const Vector& x,
                                 const std::optional<Vector>& g_opt, const SolverConfig& config);

}  // namespace rssqp
