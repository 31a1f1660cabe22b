#include "nestedcuts/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

namespace nestedcuts {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(SimplexStatus s) {
  switch (s) {
    case SimplexStatus::kOptimal: return "optimal";
    case SimplexStatus::kInfeasible: return "infeasible";
    case SimplexStatus::kPivotLimit: return "pivot_limit";
    case SimplexStatus::kSingular: return "singular";
  }
  return "unknown";
}

namespace {

constexpr int kDegenerateBeforeBland = 50;

MatrixXd basis_matrix(const InequalityLp& lp, const std::vector<Index>& basis) {
  const Index n = lp.num_vars();
  const Index q = lp.num_eq();
  MatrixXd M(n, n);
  if (q > 0) M.topRows(q) = MatrixXd(lp.A);
  for (std::size_t k = 0; k < basis.size(); ++k)
    M.row(q + static_cast<Index>(k)) = VectorXd(lp.G.row(basis[k]).transpose()).transpose();
  return M;
}

}  // namespace

std::optional<VectorXd> basis_multipliers(const InequalityLp& lp, const std::vector<Index>& basis) {
  if (static_cast<Index>(basis.size()) + lp.num_eq() != lp.num_vars()) return std::nullopt;
  Eigen::FullPivLU<MatrixXd> lu(basis_matrix(lp, basis));
  if (!lu.isInvertible()) return std::nullopt;
  return VectorXd(lu.transpose().solve(VectorXd(-lp.c)));
}

SimplexResult dual_simplex(const InequalityLp& lp, std::vector<Index> basis, int max_pivots) {
  const Index n = lp.num_vars();
  const Index m = lp.num_ineq();
  const Index q = lp.num_eq();
  SimplexResult out;
  if (static_cast<Index>(basis.size()) + q != n) return out;

  VectorXd g_norm(m);
  for (Index i = 0; i < m; ++i) {
    const double nr = lp.G.row(i).norm();
    g_norm[i] = nr > 0.0 ? nr : 1.0;
  }
  std::vector<char> in_basis(static_cast<std::size_t>(m), 0);
  for (Index b : basis) in_basis[static_cast<std::size_t>(b)] = 1;

  int degenerate = 0;
  for (int pivot = 0;; ++pivot) {
    const MatrixXd M = basis_matrix(lp, basis);
    Eigen::PartialPivLU<MatrixXd> lu(M);
    if (std::abs(lu.determinant()) == 0.0 || !std::isfinite(lu.determinant())) return out;
    VectorXd rhs(n);
    if (q > 0) rhs.head(q) = lp.b;
    for (std::size_t k = 0; k < basis.size(); ++k) rhs[q + static_cast<Index>(k)] = lp.h[basis[k]];
    const VectorXd x = lu.solve(rhs);
    const VectorXd u = lu.transpose().solve(VectorXd(-lp.c));
    if (!x.allFinite() || !u.allFinite()) return out;

    out.x = x;
    out.y = u.head(q);
    out.z = VectorXd::Zero(m);
    for (std::size_t k = 0; k < basis.size(); ++k)
      out.z[basis[k]] = std::max(0.0, u[q + static_cast<Index>(k)]);
    out.basis = basis;
    out.pivots = pivot;

    // Entering row: most violated (scaled), or lowest index once cycling is
    // suspected.
    const VectorXd gx = lp.G * x;
    const double x_scale = 1.0 + x.cwiseAbs().maxCoeff();
    Index enter = -1;
    double worst = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (in_basis[static_cast<std::size_t>(i)]) continue;
      const double viol = (gx[i] - lp.h[i]) / g_norm[i];
      if (viol <= 1e-12 * x_scale) continue;
      if (degenerate >= kDegenerateBeforeBland) {
        enter = i;
        break;
      }
      if (viol > worst) {
        worst = viol;
        enter = i;
      }
    }
    if (enter < 0) {
      out.status = SimplexStatus::kOptimal;
      return out;
    }
    if (pivot >= max_pivots) {
      out.status = SimplexStatus::kPivotLimit;
      return out;
    }

    const VectorXd w = lu.transpose().solve(VectorXd(lp.G.row(enter).transpose()));
    Index leave = -1;
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const double wk = w[q + static_cast<Index>(k)];
      if (wk <= 1e-12 * (1.0 + w.cwiseAbs().maxCoeff())) continue;
      const double ratio = std::max(0.0, u[q + static_cast<Index>(k)]) / wk;
      if (ratio < step || (ratio == step && basis[k] < basis[static_cast<std::size_t>(leave)])) {
        step = ratio;
        leave = static_cast<Index>(k);
      }
    }
    if (leave < 0) {
      out.status = SimplexStatus::kInfeasible;
      return out;
    }
    degenerate = step == 0.0 ? degenerate + 1 : 0;
    in_basis[static_cast<std::size_t>(basis[static_cast<std::size_t>(leave)])] = 0;
    in_basis[static_cast<std::size_t>(enter)] = 1;
    basis[static_cast<std::size_t>(leave)] = enter;
  }
}

}  // namespace nestedcuts
