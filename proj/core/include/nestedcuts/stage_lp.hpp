#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "nestedcuts/model.hpp"

namespace nestedcuts {

/// Polyhedral stage subproblem in the variables (x, f, theta):
///
///   min f + theta
///   f e     >= A_obj x + B_obj x_prev + c_obj
///   D x + E x_prev + H <= 0
///   theta e >= beta x + theta_cut
///   A_cpl x + B_cpl x_prev = b_cpl
///   lo <= x <= hi
struct StageLp {
  Matrix obj_a, obj_b;
  Vector obj_c;
  Matrix con_d, con_e;
  Vector con_h;
  Matrix ctg_beta;
  Vector ctg_theta;
  Matrix cpl_a, cpl_b;
  Vector cpl_b_rhs;
  Vector lo, hi;
  Vector x_prev;

  Eigen::Index n() const { return lo.size(); }
  Eigen::Index objective_rows() const { return obj_c.size(); }
  Eigen::Index constraint_rows() const { return con_h.size(); }
  Eigen::Index cost_to_go_rows() const { return ctg_theta.size(); }
  Eigen::Index coupling_rows() const { return cpl_b_rhs.size(); }

  /// Throws std::invalid_argument on inconsistent blocks or empty bundles.
  void validate() const;
};

/// Multipliers of a StageLp; nu stacks [nu_lo; nu_hi] for the box rows.
struct LpDual {
  Vector alpha;
  Vector lambda;
  Vector mu;
  Vector delta;
  Vector nu;
};

enum class LpStatus { kOptimal, kIterationLimit, kStalled };
const char* to_string(LpStatus s);

enum class GapMeasure { kRelative, kAbsolute };

struct LpSolution {
  Vector x;
  double f = 0.0;
  double theta = 0.0;
  LpDual dual;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double rel_gap = 0.0;
  LpStatus status = LpStatus::kOptimal;
  /// Interior-point iterations, including any recentering solve.
  int iterations = 0;
  /// Dual-simplex pivots of the final polish.
  int pivots = 0;
  /// The primal point is the simplex vertex rather than an interior iterate.
  bool vertex_primal = false;
  /// Certified gap after each interior-point iterate: best primal minus best
  /// dual so far, divided by max(1, |primal_value|). Nonincreasing.
  std::vector<double> gap_history;

  double abs_gap() const { return primal_value - dual_value; }
};

class InfeasibleLp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RepairFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Feasibility tolerance applied to constraint and coupling rows of the
/// certified primal point.
inline constexpr double kPrimalFeasTol = 1e-9;

/// Interior-point solve returning a feasible primal point and an exactly
/// feasible dual whose gap meets `eps` under `measure`. Throws InfeasibleLp
/// when a Farkas certificate is found.
LpSolution lp_solve(const StageLp& lp, double eps, GapMeasure measure = GapMeasure::kRelative,
                    int max_iterations = 200);

/// Among points whose certified value keeps the gap of `sol` within `eps`,
/// moves sol.x towards the one with the largest normalised slack in the
/// constraint rows. The dual is left untouched.
void recenter_constraints(const StageLp& lp, LpSolution& sol, double eps,
                          GapMeasure measure = GapMeasure::kRelative);

/// Projects an approximate dual onto the dual feasible set: clip, normalize
/// alpha and delta, then absorb the stationarity residual into nu.
LpDual dual_repair(LpDual raw, const StageLp& lp);

/// A^T alpha + D^T mu + beta^T delta - [I -I] nu - A_cpl^T lambda.
Vector dual_stationarity_residual(const LpDual& dual, const StageLp& lp);

/// Dual objective at lp.x_prev.
double dual_objective(const LpDual& dual, const StageLp& lp);

/// Primal objective of (x, f, theta) with f and theta lifted to their implied
/// minima; returns +inf if a constraint or coupling row is violated by more
/// than `tol`.
double certified_primal_value(const StageLp& lp, const Vector& x, double tol, double* f_out = nullptr,
                              double* theta_out = nullptr);

double duality_gap(const LpSolution& sol);

/// Human-readable row listing; the format is documented in docs/lp_format.md.
void write_lp_text(std::ostream& os, const StageLp& lp);

}  // namespace nestedcuts
