#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nestedcuts/cuts.hpp"
#include "nestedcuts/model.hpp"

namespace nestedcuts {

class TreeTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReferenceOptions {
  /// Stop when the true cost at the model solution exceeds the model value
  /// by at most tol * max(1, |value|) and no constraint is violated by more
  /// than feas_tol.
  double tol = 1e-7;
  double feas_tol = 1e-6;
  int max_iterations = 3000;
  std::size_t max_nodes = 10000;
};

struct ReferenceResult {
  /// Optimal value of the outer-linearized extensive form (a lower bound).
  double value = 0.0;
  /// True expected cost at the final model solution.
  double cost_at_solution = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  /// Model value after each outer-linearization round; nondecreasing.
  std::vector<double> history;
  /// Decision of the first node layer (one per realization of the first
  /// stage of the subtree).
  std::vector<Vector> first_layer;
};

/// Kelley outer linearization of the extensive form over the full scenario
/// tree. Each max-of-branches oracle gets its own epigraph or constraint
/// rows per branch. Cuts are pooled per (stage, realization, branch) and
/// reused across calls, so an evaluator is not safe for concurrent use.
class ReferenceEvaluator {
 public:
  explicit ReferenceEvaluator(const Problem& problem, ReferenceOptions options = {});

  /// Expected optimal cost of stages t..T-1 (0-based) given x_{t-1} = x_prev.
  ReferenceResult solve_from(std::size_t t, const Vector& x_prev);
  double cost_to_go(std::size_t t, const Vector& x_prev) { return solve_from(t, x_prev).value; }

  /// Subtree node count for stages t..T-1.
  std::size_t node_count(std::size_t t) const;

 private:
  struct Piece {
    OraclePtr fn;
    std::vector<AffineCut> cuts;
  };
  struct Pools {
    std::vector<Piece> objective;   // one per branch
    std::vector<Piece> constraint;  // one per branch, all <= 0
  };

  void add_cuts(Pools& pools, const Vector& x, const Vector& x_prev);

  const Problem* problem_;
  ReferenceOptions options_;
  std::vector<std::vector<Pools>> pools_;  // [t][j]
};

/// Reference optimum of the whole problem from x0.
ReferenceResult kelley_reference_solve(const Problem& problem, ReferenceOptions options = {});

}  // namespace nestedcuts
