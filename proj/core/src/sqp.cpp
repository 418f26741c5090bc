// SPDX-License-Identifier: Apache-2.0
#include "rssqp/sqp.hpp"

#include <algorithm>
#include <cmath>

#include "rssqp/merit.hpp"

namespace rssqp {

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidArgument("solver config: " + msg); };
  if (!(gamma > 1.0)) fail("gamma must be > 1");
  if (!(theta > 0.0 && theta < 1.0)) fail("theta must lie in (0, 1)");
  if (!(alpha_max > 0.0) || !(alpha_0 > 0.0) || alpha_0 > alpha_max) fail("need 0 < alpha_0 <= alpha_max");
  const double j0 = std::log(alpha_0 / alpha_max) / std::log(gamma);
  if (std::abs(j0 - std::round(j0)) > 1e-9 || std::round(j0) >= 0.0) {
    fail("alpha_0 must equal gamma^j0 * alpha_max for an integer j0 < 0");
  }
  if (!(beta_l > 0.0) || beta_l > beta_u) fail("need 0 < beta_l <= beta_u");
  if (beta_k < beta_l || beta_k > beta_u) fail("beta_k must lie in [beta_l, beta_u]");
  if (!(sigma_u > 0.0) || !(kappa_u > 0.0)) fail("sigma_u and kappa_u must be positive");
  if (!(rho_0 > 0.0)) fail("rho_0 must be positive");
  if (!(zeta_0 > 0.0) || !(zeta_c > 0.0)) fail("zeta_0 and zeta_c must be positive");
  if (!(p0_g > 0.0 && p0_g < 1.0)) fail("p0_g must lie in (0, 1)");
  if (max_iter < 0) fail("max_iter must be >= 0");
  if (sample_size < 1) fail("sample_size must be >= 1");
  if (!(hessian_xi > 0.0) || !(hessian_max > 2.0 * hessian_xi)) fail("need 0 < 2 xi < M_H");
  if (!(zeta_r > 0.0)) fail("zeta_r must be positive");
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    if (checkpoints[i] <= checkpoints[i - 1]) fail("checkpoints must be strictly increasing");
  }
  if (!checkpoints.empty() && checkpoints.front() < 0) fail("checkpoints must be >= 0");
  if (strict_theory && !(2.0 * sigma_u < beta_l)) fail("strict theory requires 2 sigma_u < beta_l");
}

double safeguard_probability(int j, double a0) {
  const double jj = static_cast<double>(j) + 1.0;
  return 1.0 - (1.0 - a0) / (jj * jj);
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Stationary: return "Stationary";
    case Termination::InfeasibleStationary: return "InfeasibleStationary";
    case Termination::MaxIterations: return "MaxIterations";
    case Termination::LineSearchFailure: return "LineSearchFailure";
    case Termination::SubproblemFailure: return "SubproblemFailure";
  }
  return "MaxIterations";
}

SolverState initial_state(const ProblemInstance& prob, const SolverConfig& config) {
  SolverState s;
  s.x = prob.x0;
  s.alpha = config.alpha_0;
  s.rho = config.rho_0;
  s.zeta = config.zeta_0;
  s.p_g = config.p0_g;
  s.j = 1;
  s.H = Matrix::Identity(prob.n, prob.n);
  s.eta = Vector::Zero(prob.m1);
  s.nu_hat = Vector::Zero(prob.m2);
  s.last_multipliers = {Vector::Zero(prob.m1), Vector::Zero(prob.m2)};
  return s;
}

namespace {

// Returns true when the regularized fallback was needed.
bool distance_phase(SolverState& state, const ProblemInstance& prob, const SolverConfig& config) {
  state.eval = evaluate_constraints(prob, state.x);
  const double phi = state.eval.phi;
  double sigma_k = std::min(config.sigma_u, config.kappa_u * phi);
  if (!config.strict_theory) sigma_k = std::min(sigma_k, config.beta_k);
  state.sigma_k = sigma_k;
  const DistanceLpData data{state.eval.h_val, state.eval.c_val, state.eval.grad_h,
                            state.eval.grad_c, sigma_k};
  SubproblemSolution sol = solve_distance_lp(data);
  bool fallback = false;
  if (sol.status != SolveStatus::Optimal) {
    fallback = true;
    ++state.regularized_fallbacks;
    sol = solve_regularized_distance_qp(data, config.zeta_r);
    if (sol.status != SolveStatus::Optimal) {
      throw SolverFailure("distance subproblem failed at iteration " + std::to_string(state.k) +
                          " (" + to_string(sol.status) + ")");
    }
  }
  state.p = sol.primal.head(prob.n);
  state.kappa = std::min(sol.primal[prob.n], phi);
  state.delta_phi = std::max(0.0, phi - state.kappa);
  return fallback;
}

SubproblemSolution direction(const SolverState& state, const Vector& g, const SolverConfig& config) {
  DirectionQpData data{g,
                       state.H,
                       state.eval.h_val,
                       state.eval.c_val,
                       state.eval.grad_h,
                       state.eval.grad_c,
                       state.kappa,
                       config.beta_k};
  SubproblemSolution sol = solve_direction_qp(data, state.p);
  if (sol.status != SolveStatus::Optimal) {
    throw SolverFailure("direction QP failed at iteration " + std::to_string(state.k) + " (" +
                        to_string(sol.status) + ")");
  }
  return sol;
}

Vector lagrangian_gradient(const Vector& g, const Matrix& grad_h, const Matrix& grad_c,
                           const Vector& eta, const Vector& nu) {
  Vector out = g;
  if (eta.size() > 0) out += grad_h * eta;
  if (nu.size() > 0) out += grad_c * nu;
  return out;
}

void remember_secant(SolverState& state, const Vector& g) {
  state.secant_x = state.x;
  state.secant_g = g;
  state.secant_grad_h = state.eval.grad_h;
  state.secant_grad_c = state.eval.grad_c;
}

Checkpoint snapshot(const ProblemInstance& prob, const SolverState& s) {
  const double phi = s.fresh ? evaluate_constraints(prob, s.x).phi : s.eval.phi;
  return Checkpoint{s.k, s.x, phi, s.rho, s.alpha, s.zeta, s.p_g, s.accepted_steps};
}

bool wants_checkpoint(const SolverConfig& config, int k) {
  return k == 0 || std::binary_search(config.checkpoints.begin(), config.checkpoints.end(), k);
}

MeritContext merit_context(const SolverState& state, const SolverConfig& config, const Vector& g,
                           const Vector& d) {
  MeritContext ctx;
  ctx.rho = state.rho;
  ctx.theta = config.theta;
  ctx.delta_phi = state.delta_phi;
  ctx.g_dot_d = g.dot(d);
  ctx.dHd = std::max(0.0, d.dot(state.H * d));
  return ctx;
}

// Applies the penalty update to state.rho; returns true on a degenerate update.
bool apply_penalty_update(SolverState& state, MeritContext& ctx) {
  const double before = state.rho;
  bool degenerate = false;
  try {
    state.rho = update_penalty(ctx);
  } catch (const DegeneratePenaltyUpdate& e) {
    state.rho = e.fallback_rho();
    ++state.degenerate_updates;
    degenerate = true;
  }
  if (state.rho > before) ++state.penalty_increases;
  ctx.rho = state.rho;
  return degenerate;
}

Multipliers split_multipliers(const SubproblemSolution& sol) {
  return {sol.eq_upper - sol.eq_lower, sol.ineq};
}

}  // namespace

void refresh_distance_phase(SolverState& state, const ProblemInstance& prob,
                            const SolverConfig& config) {
  distance_phase(state, prob, config);
}

Matrix hessian_policy_update(const SolverState& state, const Vector& g_current,
                             const SolverConfig& config) {
  const auto n = g_current.size();
  if (config.hessian == HessianPolicy::Identity) return Matrix::Identity(n, n);
  const Matrix base = state.H.rows() == n ? state.H : Matrix::Identity(n, n);
  if (!state.secant_x) return base;
  const Vector s = state.x - *state.secant_x;
  const Vector y =
      lagrangian_gradient(g_current, state.eval.grad_h, state.eval.grad_c, state.eta, state.nu_hat) -
      lagrangian_gradient(state.secant_g, state.secant_grad_h, state.secant_grad_c, state.eta,
                          state.nu_hat);
  return damped_secant_update(base, s, y, config.hessian_xi, config.hessian_max);
}

SolveResult deterministic_sqp_solve(const ProblemInstance& prob, const SolverConfig& config) {
  config.validate();
  prob.validate();
  SolveResult res;
  SolverState& st = res.state;
  st = initial_state(prob, config);
  if (config.step_rule == StepRule::Backtracking) st.alpha = 1.0;
  res.termination = Termination::MaxIterations;
  bool multipliers_current = false;

  auto finish_classification = [&]() {
    if (!multipliers_current) {
      // Multipliers from a direction QP at the final iterate.
      try {
        SolverState probe = st;
        distance_phase(probe, prob, config);
        const Vector g = true_objective(prob, probe.x, 0.0).gradient;
        st.last_multipliers = split_multipliers(direction(probe, g, config));
      } catch (const std::exception& e) {
        res.diagnostic = e.what();
        res.classification = Stationarity::None;
        return;
      }
    }
    res.classification = classify_stationarity(prob, st.x, st.last_multipliers, config.kkt_tol);
  };

  try {
    while (true) {
      if (wants_checkpoint(config, st.k)) res.checkpoints.push_back(snapshot(prob, st));
      if (st.k >= config.max_iter) break;

      TraceEntry te;
      te.k = st.k;
      te.x = st.x;
      te.fresh = st.fresh;
      if (st.fresh) {
        te.regularized_fallback = distance_phase(st, prob, config);
        if (st.p.cwiseAbs().maxCoeff() <= config.infeasible_step_tol &&
            st.eval.phi > config.kkt_phi_tol) {
          res.termination = Termination::InfeasibleStationary;
          res.classification = classify_stationarity(prob, st.x, st.last_multipliers, config.kkt_tol);
          if (res.classification != Stationarity::InfeasibleStationary) {
            res.diagnostic = "distance step vanished but phi-stationarity check did not confirm";
          }
          return res;
        }
      }
      const ObjectiveValue obj = true_objective(prob, st.x, 0.0);
      const Vector& g = obj.gradient;
      if (st.fresh) {
        st.H = hessian_policy_update(st, g, config);
      }
      const SubproblemSolution qp = direction(st, g, config);
      const Vector& d = qp.primal;
      st.last_multipliers = split_multipliers(qp);
      multipliers_current = true;
      const double d_inf = d.cwiseAbs().maxCoeff();
      st.last_d_norm = d.norm();

      te.phi = st.eval.phi;
      te.sigma_k = st.sigma_k;
      te.kappa = st.kappa;
      te.delta_phi = st.delta_phi;
      te.p = st.p;
      te.H = st.H;
      te.g = g;
      te.d = d;
      te.g_norm = g.norm();
      te.zeta = st.zeta;
      te.p_g = st.p_g;
      te.j = st.j;

      if (d_inf <= config.kkt_step_tol && st.eval.phi <= config.kkt_phi_tol) {
        res.termination = Termination::Stationary;
        res.classification = classify_stationarity(prob, st.x, st.last_multipliers, config.kkt_tol);
        return res;
      }

      MeritContext ctx = merit_context(st, config, g, d);
      te.rho_before = st.rho;
      te.degenerate_penalty = apply_penalty_update(st, ctx);
      te.rho = st.rho;
      te.g_dot_d = ctx.g_dot_d;
      te.dHd = ctx.dHd;
      const double pred = predicted_reduction(ctx);
      te.pred = pred;
      const double psi0 = merit_value(obj.value, st.eval.phi, st.rho);
      te.psi0 = psi0;
      if (pred <= config.merit_resolution * (1.0 + std::abs(psi0)) &&
          st.eval.phi <= config.kkt_phi_tol) {
        if (config.record_trace) res.trace.push_back(te);
        res.termination = Termination::Stationary;
        res.classification = classify_stationarity(prob, st.x, st.last_multipliers, config.kkt_tol);
        return res;
      }

      auto trial = [&](double alpha, double& psis) {
        const Vector xt = st.x + alpha * d;
        const double ft = true_objective(prob, xt, 0.0).value;
        psis = merit_value(ft, evaluate_constraints(prob, xt).phi, st.rho);
        return line_search_accept(psi0, psis, alpha, pred, config.theta);
      };

      auto accept_step = [&](double alpha) {
        remember_secant(st, g);
        st.x += alpha * d;
        st.eta = qp.eq_upper - qp.eq_lower;
        st.nu_hat = qp.ineq;
        st.fresh = true;
        st.last_success = true;
        ++st.accepted_steps;
        multipliers_current = false;
      };

      if (config.step_rule == StepRule::Backtracking) {
        double alpha = 1.0;
        bool ok = false;
        double psis = 0.0;
        for (int bt = 0; bt <= config.max_backtracks; ++bt) {
          if (trial(alpha, psis)) {
            ok = true;
            break;
          }
          alpha /= config.gamma;
        }
        te.alpha = alpha;
        te.psis = psis;
        te.accepted = ok;
        if (config.record_trace) res.trace.push_back(te);
        if (!ok) {
          res.termination = Termination::LineSearchFailure;
          ++st.k;
          break;
        }
        st.alpha = alpha;
        accept_step(alpha);
      } else {
        double psis = 0.0;
        const bool ok = trial(st.alpha, psis);
        te.alpha = st.alpha;
        te.psis = psis;
        te.accepted = ok;
        if (config.record_trace) res.trace.push_back(te);
        if (ok) {
          accept_step(st.alpha);
          st.alpha = std::min(config.gamma * st.alpha, config.alpha_max);
        } else {
          st.fresh = false;
          st.last_success = false;
          st.alpha /= config.gamma;
        }
      }
      ++st.k;
    }
  } catch (const SolverFailure& e) {
    res.termination = Termination::SubproblemFailure;
    res.diagnostic = e.what();
    return res;
  }
  finish_classification();
  return res;
}

void stochastic_sqp_step(SolverState& st, const ProblemInstance& prob, const SolverConfig& config,
                         const StochasticRun& run, std::vector<TraceEntry>* trace) {
  TraceEntry te;
  te.k = st.k;
  te.x = st.x;
  te.fresh = st.fresh;
  if (st.fresh) {
    te.regularized_fallback = distance_phase(st, prob, config);
    if (config.hessian == HessianPolicy::Identity) st.H = Matrix::Identity(prob.n, prob.n);
  }

  StreamKey key = run.key;
  key.iteration = static_cast<std::uint64_t>(st.k);
  const double sigma = prob.sigma;

  int n_grad = config.sample_size;
  int n_func = config.sample_size;
  if (config.adaptive_sampling && sigma > 0.0) {
    const double dn = std::max(st.last_d_norm, 1e-12);
    const double vg = gradient_variance(prob, st.x, sigma);
    const double vf = function_variance(prob, st.x, sigma);
    n_grad = vg > 0.0 ? required_sample_size(vg, config.kappa_g, st.alpha, dn, st.p_g,
                                             config.sample_c_scale, config.max_sample_size)
                      : 1;
    n_func = vf > 0.0 ? required_sample_size(vf, config.eps_f, st.alpha, dn, config.p_f,
                                             config.sample_c_scale, config.max_sample_size)
                      : 1;
  }
  const Vector g =
      sample_gradient(prob, st.x, sigma, n_grad, run.seed, key, config.sampling_mode).value;
  if (st.fresh && config.hessian == HessianPolicy::DampedSecant) {
    st.H = hessian_policy_update(st, g, config);
  }

  const SubproblemSolution qp = direction(st, g, config);
  const Vector& d = qp.primal;
  st.last_multipliers = split_multipliers(qp);
  st.last_d_norm = d.norm();

  const double g_norm = g.norm();
  te.safeguard_triggered = g_norm > st.zeta;
  if (te.safeguard_triggered) {
    st.zeta = std::max(st.zeta + config.zeta_c, g_norm);
    st.p_g = safeguard_probability(st.j, config.p0_g);
    ++st.j;
    ++st.safeguard_triggers;
  }

  MeritContext ctx = merit_context(st, config, g, d);
  te.rho_before = st.rho;
  te.degenerate_penalty = apply_penalty_update(st, ctx);
  const double pred = predicted_reduction(ctx);

  const Vector x_trial = st.x + st.alpha * d;
  const double phi_trial = evaluate_constraints(prob, x_trial).phi;
  const auto [f0, fs] = sample_function_pair(prob, st.x, x_trial, sigma, n_func, run.seed, key,
                                             config.sampling_mode);
  const double psi0 = merit_value(f0.scalar(), st.eval.phi, st.rho);
  const double psis = merit_value(fs.scalar(), phi_trial, st.rho);
  const bool ok = line_search_accept(psi0, psis, st.alpha, pred, config.theta);

  if (trace) {
    te.phi = st.eval.phi;
    te.sigma_k = st.sigma_k;
    te.kappa = st.kappa;
    te.delta_phi = st.delta_phi;
    te.p = st.p;
    te.H = st.H;
    te.g = g;
    te.d = d;
    te.g_norm = g_norm;
    te.zeta = st.zeta;
    te.p_g = st.p_g;
    te.j = st.j;
    te.rho = st.rho;
    te.g_dot_d = ctx.g_dot_d;
    te.dHd = ctx.dHd;
    te.pred = pred;
    te.alpha = st.alpha;
    te.psi0 = psi0;
    te.psis = psis;
    te.accepted = ok;
    te.gradient_samples = n_grad;
    te.function_samples = n_func;
    trace->push_back(std::move(te));
  }

  if (ok) {
    remember_secant(st, g);
    st.x = x_trial;
    st.alpha = std::min(config.gamma * st.alpha, config.alpha_max);
    st.eta = qp.eq_upper - qp.eq_lower;
    st.nu_hat = qp.ineq;
    st.fresh = true;
    st.last_success = true;
    ++st.accepted_steps;
  } else {
    st.alpha /= config.gamma;
    st.fresh = false;
    st.last_success = false;
  }
  ++st.k;
}

SolveResult stochastic_sqp_solve(const ProblemInstance& prob, const SolverConfig& config,
                                 const StochasticRun& run) {
  config.validate();
  prob.validate();
  SolveResult res;
  res.state = initial_state(prob, config);
  SolverState& st = res.state;
  while (true) {
    if (wants_checkpoint(config, st.k)) res.checkpoints.push_back(snapshot(prob, st));
    if (st.k >= config.max_iter) break;
    stochastic_sqp_step(st, prob, config, run, config.record_trace ? &res.trace : nullptr);
  }
  res.termination = Termination::MaxIterations;
  return res;
}

OptimalityMeasure optimality_chi(const ProblemInstance& prob, const Vector& x,
                                 const std::optional<Vector>& g_opt, const SolverConfig& config) {
  OptimalityMeasure out;
  const EvalPoint ep = evaluate_constraints(prob, x);
  const Vector grad = true_objective(prob, x, 0.0).gradient;
  const SubproblemSolution s = solve_optimality_lp(grad, ep.grad_h, ep.grad_c, config.beta_l);
  if (s.status == SolveStatus::Optimal) out.chi = -s.objective_value;
  if (g_opt) {
    const SubproblemSolution sg = solve_optimality_lp(*g_opt, ep.grad_h, ep.grad_c, config.beta_l);
    if (sg.status == SolveStatus::Optimal) out.chi_g = -sg.objective_value;
  }
  return out;
}

}  // namespace rssqp
