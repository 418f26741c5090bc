// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "rssqp/subproblems.hpp"
#include "rssqp/suite.hpp"

namespace {

rssqp::DistanceLpData lp_at_start(const char* id) {
  const rssqp::ProblemInstance p = rssqp::build_adapted_problem(id, 1.0);
  const rssqp::EvalPoint ep = rssqp::evaluate_constraints(p, p.x0);
  return {ep.h_val, ep.c_val, ep.grad_h, ep.grad_c, std::min(2.0 * ep.phi, 100.0)};
}

void BM_DistanceLp(benchmark::State& state) {
  const auto data = lp_at_start("HS63");
  for (auto _ : state) benchmark::DoNotOptimize(rssqp::solve_distance_lp(data));
}
BENCHMARK(BM_DistanceLp);

void BM_DirectionQp(benchmark::State& state) {
  const auto lp = lp_at_start("HS63");
  const auto dist = rssqp::solve_distance_lp(lp);
  const auto n = lp.n();
  const rssqp::DirectionQpData qp{rssqp::Vector::Ones(n), rssqp::Matrix::Identity(n, n), lp.h, lp.c,
                                  lp.grad_h, lp.grad_c, dist.primal[n], 100.0};
  const rssqp::Vector start = dist.primal.head(n);
  for (auto _ : state) benchmark::DoNotOptimize(rssqp::solve_direction_qp(qp, start));
}
BENCHMARK(BM_DirectionQp);

void BM_OptimalityLp(benchmark::State& state) {
  const auto lp = lp_at_start("HS31");
  const rssqp::Vector g = rssqp::Vector::Ones(lp.n());
  for (auto _ : state) benchmark::DoNotOptimize(rssqp::solve_optimality_lp(g, lp.grad_h, lp.grad_c, 100.0));
}
BENCHMARK(BM_OptimalityLp);

}  // namespace
