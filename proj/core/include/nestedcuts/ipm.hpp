#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace nestedcuts {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// min c.x  s.t.  G x <= h,  A x = b  (x free).
struct InequalityLp {
  SparseRowMatrix G;
  Eigen::VectorXd h;
  SparseRowMatrix A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;

  Eigen::Index num_vars() const { return c.size(); }
  Eigen::Index num_ineq() const { return h.size(); }
  Eigen::Index num_eq() const { return b.size(); }
};

/// Current point in the original (unscaled) row space. z are the multipliers
/// of G x <= h, y those of A x = b, with stationarity c + G^T z + A^T y = 0.
struct IpmIterate {
  const Eigen::VectorXd& x;
  const Eigen::VectorXd& s;
  const Eigen::VectorXd& z;
  const Eigen::VectorXd& y;
  int iteration;
  double mu;
};

enum class IpmStatus { kConverged, kIterationLimit, kStalled, kInfeasible };

const char* to_string(IpmStatus s);

enum class MonitorVerdict { kContinue, kStop, kInfeasible };

/// Inspects every iterate; replaces the built-in stopping test when set.
using IpmMonitor = std::function<MonitorVerdict(const IpmIterate&)>;

struct IpmOptions {
  int max_iterations = 200;
  double rel_gap = 1e-9;
  double feas_tol = 1e-9;
  /// Initial x; zero when empty.
  Eigen::VectorXd x_start;
};

struct IpmResult {
  Eigen::VectorXd x, s, z, y;
  IpmStatus status = IpmStatus::kIterationLimit;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
};

/// Mehrotra predictor-corrector on the inequality form with unit-norm row
/// scaling and dense Cholesky on the normal equations G^T (Z/S) G.
IpmResult solve_ipm(const InequalityLp& lp, const IpmOptions& options,
                    const IpmMonitor& monitor = {});

/// Vertex guessed from an interior iterate. z and y are full-length
/// multipliers, zero off the chosen active set.
struct VertexGuess {
  Eigen::VectorXd x, z, y;
  std::vector<Eigen::Index> basis;  // chosen inequality rows
};

/// Crossover: takes the rows with the smallest s_i / z_i (after unit-norm
/// row scaling) that are linearly independent of the equality rows and of
/// each other, solves for the vertex they define and for its multipliers.
/// Returns nothing when no nonsingular basis is found. The caller is
/// responsible for checking feasibility of either part.
std::optional<VertexGuess> crossover(const InequalityLp& lp, const Eigen::VectorXd& s,
                                     const Eigen::VectorXd& z);

}  // namespace nestedcuts
