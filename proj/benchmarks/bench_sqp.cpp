// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "rssqp/sqp.hpp"
#include "rssqp/suite.hpp"

namespace {

void BM_StochasticStep(benchmark::State& state) {
  const rssqp::ProblemInstance p = rssqp::build_adapted_problem("HS31", 1.0);
  rssqp::SolverConfig config;
  config.sample_size = static_cast<int>(state.range(0));
  rssqp::StochasticRun run;
  run.seed = 1;
  run.key.problem = rssqp::fnv1a64(p.name);
  rssqp::SolverState st = rssqp::initial_state(p, config);
  for (auto _ : state) {
    if (st.k >= 1000) st = rssqp::initial_state(p, config);
    rssqp::stochastic_sqp_step(st, p, config, run);
  }
}
BENCHMARK(BM_StochasticStep)->Arg(50)->Arg(100000);

void BM_DeterministicSolve(benchmark::State& state) {
  const rssqp::ProblemInstance p = rssqp::build_adapted_problem("HS06", 0.0);
  rssqp::SolverConfig config;
  config.record_trace = false;
  for (auto _ : state) benchmark::DoNotOptimize(rssqp::deterministic_sqp_solve(p, config));
}
BENCHMARK(BM_DeterministicSolve);

}  // namespace

BENCHMARK_MAIN();
