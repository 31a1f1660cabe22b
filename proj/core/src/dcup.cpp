#include "nestedcuts/dcup.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace nestedcuts {

DcupStep dcup_iterate(SolverState& state, double eps) {
  const Problem& pb = *state.problem;
  if (!pb.deterministic()) throw std::invalid_argument("dcup requires deterministic instance");
  const std::vector<std::size_t> path(pb.stage_count(), 0);
  DcupStep step;
  step.report = forward_pass(state, path, eps, eps, GapMeasure::kRelative, 1);
  step.lb = step.report.lower_bound;
  step.ub = step.report.forward_cost;
  step.max_violation = std::max(0.0, step.report.max_violation);
  for (const auto& st : step.report.stages) step.trajectory.push_back(st.children.front().solution.x);
  return step;
}

DcupResult dcup_run(const Problem& problem, const DcupOptions& options, SolverState* state_out) {
  if (!problem.deterministic()) throw std::invalid_argument("dcup requires deterministic instance");
  const auto t0 = std::chrono::steady_clock::now();
  SolverState state(problem, options.warm_start_count == 0);
  if (options.warm_start_count > 0) {
    CounterRng rng(options.seed, RngStream::kWarmStart);
    warm_start(state, options.warm_start_count, rng);
  }
  DcupResult out;
  for (int k = 1; k <= options.max_iters; ++k) {
    DcupStep step = dcup_iterate(state, options.eps);
    if (options.observer) options.observer(step, state.model);
    DcupRecord rec;
    rec.iter = k;
    rec.lb = step.lb;
    rec.ub = step.ub;
    rec.max_violation = step.max_violation;
    rec.infeasible_trajectory = step.max_violation > kTrajectoryFeasTol;
    rec.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.records.push_back(rec);
    out.trajectory = std::move(step.trajectory);
    if (rec.ub - rec.lb <= options.tol * std::max(1.0, std::abs(rec.ub))) {
      out.converged = true;
      break;
    }
  }
  if (state_out) *state_out = std::move(state);
  return out;
}

namespace {

void put(std::ostream& os, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, res.ptr - buf);
}

}  // namespace

void write_dcup_trace(std::ostream& os, const DcupResult& result, bool with_time) {
  os << "iter,lb,ub,max_violation,time_s\n";
  for (const auto& r : result.records) {
    os << r.iter << ',';
    put(os, r.lb);
    os << ',';
    put(os, r.ub);
    os << ',';
    put(os, r.max_violation);
    os << ',';
    put(os, with_time ? r.time_s : 0.0);
    os << '\n';
  }
}

}  // namespace nestedcuts
