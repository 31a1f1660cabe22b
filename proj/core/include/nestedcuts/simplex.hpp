#pragma once

#include <vector>

#include "nestedcuts/ipm.hpp"

namespace nestedcuts {

enum class SimplexStatus { kOptimal, kInfeasible, kPivotLimit, kSingular };

const char* to_string(SimplexStatus s);

struct SimplexResult {
  SimplexStatus status = SimplexStatus::kSingular;
  /// Vertex of the final basis and full-length multipliers (zero off-basis).
  Eigen::VectorXd x, z, y;
  std::vector<Eigen::Index> basis;
  int pivots = 0;
};

/// Dual simplex on the few-column inequality form: a basis is a set of
/// num_vars - num_eq inequality rows that together with the equality rows is
/// nonsingular, and must be dual feasible on entry (nonnegative inequality
/// multipliers). Every basis visited stays dual feasible, so z is a valid
/// dual point even when the pivot limit is hit.
SimplexResult dual_simplex(const InequalityLp& lp, std::vector<Eigen::Index> basis,
                           int max_pivots = 20000);

/// Multipliers of a basis; empty optional if singular.
std::optional<Eigen::VectorXd> basis_multipliers(const InequalityLp& lp,
                                                 const std::vector<Eigen::Index>& basis);

}  // namespace nestedcuts
