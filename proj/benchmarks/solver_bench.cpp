#include <cmath>

#include <benchmark/benchmark.h>

#include "nestedcuts/instances.hpp"
#include "nestedcuts/stodcup.hpp"

namespace nc = nestedcuts;

namespace {

// Solver state after warm start and `iters` exact iterations.
nc::SolverState trained_state(const nc::Problem& pb, int iters) {
  nc::SolverState st(pb);
  nc::CounterRng warm(1, nc::RngStream::kWarmStart);
  nc::warm_start(st, 20, warm);
  nc::CounterRng paths(1, nc::RngStream::kPathSampling);
  for (int k = 0; k < iters; ++k)
    nc::forward_pass(st, nc::sample_path(pb, paths), 1e-10, 1e-9, nc::GapMeasure::kRelative);
  return st;
}

// Stage-1 LP of a (3, n, 2) instance after 50 iterations, solved to the
// relative tolerance 10^-range(1).
void BM_LpSolve(benchmark::State& s) {
  const nc::Problem pb = nc::generate_instance(3, static_cast<int>(s.range(0)), 2, 1);
  const nc::SolverState st = trained_state(pb, 50);
  const nc::StageLp lp = nc::assemble_stage_lp(st.model, pb, 1, 0, pb.x0());
  const double eps = std::pow(10.0, -static_cast<double>(s.range(1)));
  long iters = 0;
  for (auto _ : s) {
    const nc::LpSolution sol = nc::lp_solve(lp, eps);
    iters += sol.iterations;
    benchmark::DoNotOptimize(sol.primal_value);
  }
  s.counters["iterations"] = benchmark::Counter(static_cast<double>(iters), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_LpSolve)->ArgsProduct({{2, 10}, {2, 6, 10}})->Unit(benchmark::kMicrosecond);

// One forward pass from a state with range(1) completed iterations.
void BM_ForwardPass(benchmark::State& s) {
  const nc::Problem pb = nc::generate_instance(3, static_cast<int>(s.range(0)), 2, 1);
  const nc::SolverState base = trained_state(pb, static_cast<int>(s.range(1)));
  nc::CounterRng paths(2, nc::RngStream::kPathSampling);
  for (auto _ : s) {
    s.PauseTiming();
    nc::SolverState st = base;
    const auto path = nc::sample_path(pb, paths);
    s.ResumeTiming();
    benchmark::DoNotOptimize(nc::forward_pass(st, path, 1e-10, 1e-9, nc::GapMeasure::kRelative).lp_iterations);
  }
}
BENCHMARK(BM_ForwardPass)->ArgsProduct({{2, 10}, {10, 100}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
