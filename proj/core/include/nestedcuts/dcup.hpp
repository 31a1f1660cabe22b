#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nestedcuts/stodcup.hpp"

namespace nestedcuts {

/// Trajectory violations above this mark the upper bound as unreliable.
inline constexpr double kTrajectoryFeasTol = 1e-6;

struct DcupStep {
  double lb = 0.0;
  /// sum_t f_t(x_t, x_{t-1}) along the trial trajectory.
  double ub = 0.0;
  double max_violation = 0.0;
  std::vector<Vector> trajectory;
  IterationReport report;
};

/// One deterministic iteration; requires a single-realization problem.
DcupStep dcup_iterate(SolverState& state, double eps = 1e-9);

struct DcupRecord {
  int iter = 0;
  double lb = 0.0;
  double ub = 0.0;
  double max_violation = 0.0;
  bool infeasible_trajectory = false;
  double time_s = 0.0;
};

struct DcupOptions {
  int max_iters = 200;
  double tol = 1e-3;
  int warm_start_count = 0;
  std::uint64_t seed = 1;
  double eps = 1e-9;
  std::function<void(const DcupStep&, const PolyhedralModel&)> observer;
};

struct DcupResult {
  std::vector<DcupRecord> records;
  std::vector<Vector> trajectory;
  bool converged = false;
};

/// Iterates until ub - lb <= tol * max(1, |ub|) or max_iters. Throws
/// std::invalid_argument for problems with more than one realization per stage.
DcupResult dcup_run(const Problem& problem, const DcupOptions& options,
                    SolverState* state_out = nullptr);

/// iter,lb,ub,max_violation,time_s
void write_dcup_trace(std::ostream& os, const DcupResult& result, bool with_time);

}  // namespace nestedcuts
