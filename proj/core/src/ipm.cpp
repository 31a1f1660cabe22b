#include "nestedcuts/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace nestedcuts {

using Eigen::Index;
using Eigen::VectorXd;
using Eigen::MatrixXd;

const char* to_string(IpmStatus s) {
  switch (s) {
    case IpmStatus::kConverged: return "converged";
    case IpmStatus::kIterationLimit: return "iteration_limit";
    case IpmStatus::kStalled: return "stalled";
    case IpmStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

VectorXd row_norms(const SparseRowMatrix& M) {
  VectorXd norms(M.rows());
  for (Index i = 0; i < M.rows(); ++i) {
    double acc = 0.0;
    for (SparseRowMatrix::InnerIterator it(M, i); it; ++it) acc += it.value() * it.value();
    norms[i] = acc > 0.0 ? std::sqrt(acc) : 1.0;
  }
  return norms;
}

SparseRowMatrix scale_rows(const SparseRowMatrix& M, const VectorXd& norms) {
  SparseRowMatrix out = M;
  for (Index i = 0; i < out.rows(); ++i) {
    for (SparseRowMatrix::InnerIterator it(out, i); it; ++it) it.valueRef() /= norms[i];
  }
  return out;
}

// Largest step in (0, 1] keeping v + step * dv >= 0.
double max_step(const VectorXd& v, const VectorXd& dv) {
  double step = 1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) step = std::min(step, -v[i] / dv[i]);
  }
  return step;
}

// Dense normal matrix G^T diag(d) G accumulated row by row.
MatrixXd normal_matrix(const SparseRowMatrix& G, const VectorXd& d) {
  const Index n = G.cols();
  MatrixXd K = MatrixXd::Zero(n, n);
  for (Index i = 0; i < G.rows(); ++i) {
    for (SparseRowMatrix::InnerIterator a(G, i); a; ++a) {
      const double da = d[i] * a.value();
      for (SparseRowMatrix::InnerIterator b(G, i); b; ++b) {
        if (b.col() > a.col()) break;
        K(a.col(), b.col()) += da * b.value();
      }
    }
  }
  return K.selfadjointView<Eigen::Lower>();
}

struct NewtonSystem {
  Eigen::LLT<MatrixXd> k_factor;
  MatrixXd kinv_at;  // K^{-1} A^T
  Eigen::LDLT<MatrixXd> schur;
  bool ok = false;
};

NewtonSystem factor(const SparseRowMatrix& G, const SparseRowMatrix& A, const VectorXd& d) {
  NewtonSystem sys;
  MatrixXd K = normal_matrix(G, d);
  const double scale = 1.0 + K.diagonal().cwiseAbs().maxCoeff();
  double reg = 1e-14 * scale;
  for (int attempt = 0; attempt < 8; ++attempt) {
    MatrixXd Kr = K;
    Kr.diagonal().array() += reg;
    sys.k_factor.compute(Kr);
    if (sys.k_factor.info() == Eigen::Success) {
      sys.ok = true;
      break;
    }
    reg *= 100.0;
  }
  if (!sys.ok) return sys;
  if (A.rows() > 0) {
    MatrixXd At = MatrixXd(A.transpose());
    sys.kinv_at = sys.k_factor.solve(At);
    MatrixXd S = A * sys.kinv_at;
    S.diagonal().array() += 1e-14 * (1.0 + S.diagonal().cwiseAbs().maxCoeff());
    sys.schur.compute(S);
    sys.ok = sys.schur.info() == Eigen::Success;
  }
  return sys;
}

}  // namespace

IpmResult solve_ipm(const InequalityLp& lp, const IpmOptions& options, const IpmMonitor& monitor) {
  const Index n = lp.num_vars();
  const Index m = lp.num_ineq();
  const Index q = lp.num_eq();

  const VectorXd g_norm = row_norms(lp.G);
  const VectorXd a_norm = row_norms(lp.A);
  const SparseRowMatrix G = scale_rows(lp.G, g_norm);
  const SparseRowMatrix A = scale_rows(lp.A, a_norm);
  const VectorXd h = lp.h.cwiseQuotient(g_norm);
  const VectorXd b = lp.b.cwiseQuotient(a_norm);
  const VectorXd& c = lp.c;

  VectorXd x = options.x_start.size() == n ? options.x_start : VectorXd::Zero(n);
  VectorXd s = (h - G * x).cwiseMax(1.0);
  VectorXd z = VectorXd::Ones(m);
  VectorXd y = VectorXd::Zero(q);

  const double h_scale = 1.0 + (m > 0 ? h.cwiseAbs().maxCoeff() : 0.0);
  const double b_scale = 1.0 + (q > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  const double c_scale = 1.0 + (n > 0 ? c.cwiseAbs().maxCoeff() : 0.0);

  IpmResult result;
  VectorXd s_orig(m), z_orig(m), y_orig(q);
  int stalled_steps = 0;

  auto finish = [&](IpmStatus status, int iterations) {
    result.x = x;
    result.s = s.cwiseProduct(g_norm);
    result.z = z.cwiseQuotient(g_norm);
    result.y = y.cwiseQuotient(a_norm);
    result.status = status;
    result.iterations = iterations;
    result.primal_objective = c.dot(x);
    result.dual_objective = -h.dot(z) - b.dot(y);
    return result;
  };

  for (int it = 0;; ++it) {
    const VectorXd r_x = c + G.transpose() * z + A.transpose() * y;
    const VectorXd r_z = G * x + s - h;
    const VectorXd r_y = A * x - b;
    const double mu = m > 0 ? s.dot(z) / static_cast<double>(m) : 0.0;

    if (monitor) {
      s_orig = s.cwiseProduct(g_norm);
      z_orig = z.cwiseQuotient(g_norm);
      y_orig = y.cwiseQuotient(a_norm);
      const IpmIterate view{x, s_orig, z_orig, y_orig, it, mu};
      const MonitorVerdict verdict = monitor(view);
      if (verdict == MonitorVerdict::kStop) return finish(IpmStatus::kConverged, it);
      if (verdict == MonitorVerdict::kInfeasible) return finish(IpmStatus::kInfeasible, it);
    } else {
      const double pobj = c.dot(x);
      const double dobj = -h.dot(z) - b.dot(y);
      const bool feasible = r_z.lpNorm<Eigen::Infinity>() <= options.feas_tol * h_scale &&
                            (q == 0 || r_y.lpNorm<Eigen::Infinity>() <= options.feas_tol * b_scale) &&
                            r_x.lpNorm<Eigen::Infinity>() <= options.feas_tol * c_scale;
      if (feasible && std::abs(pobj - dobj) <= options.rel_gap * std::max(1.0, std::abs(pobj))) {
        return finish(IpmStatus::kConverged, it);
      }
    }
    if (it >= options.max_iterations) return finish(IpmStatus::kIterationLimit, it);

    const VectorXd d = z.cwiseQuotient(s);
    NewtonSystem sys = factor(G, A, d);
    if (!sys.ok) return finish(IpmStatus::kStalled, it);

    VectorXd dx(n), dy(q), dz(m), ds(m);
    auto solve = [&](const VectorXd& rc) {
      const VectorXd w = (z.cwiseProduct(r_z) - rc).cwiseQuotient(s);
      const VectorXd rhs1 = -r_x - G.transpose() * w;
      if (q > 0) {
        const VectorXd kr = sys.k_factor.solve(rhs1);
        dy = sys.schur.solve(A * kr + r_y);
        dx = kr - sys.kinv_at * dy;
      } else {
        dx = sys.k_factor.solve(rhs1);
      }
      const VectorXd g_dx = G * dx;
      ds = -r_z - g_dx;
      dz = w + d.cwiseProduct(g_dx);
    };

    // Predictor.
    VectorXd rc = s.cwiseProduct(z);
    solve(rc);
    const double ap_aff = max_step(s, ds);
    const double ad_aff = max_step(z, dz);
    const double mu_aff =
        m > 0 ? (s + ap_aff * ds).dot(z + ad_aff * dz) / static_cast<double>(m) : 0.0;
    const double sigma = mu > 0.0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;

    // Corrector.
    rc.array() += ds.cwiseProduct(dz).array() - sigma * mu;
    solve(rc);
    const double eta = std::max(0.9, 1.0 - 10.0 * mu / (1.0 + std::abs(c.dot(x))));
    const double ap = std::min(1.0, eta * max_step(s, ds));
    const double ad = std::min(1.0, eta * max_step(z, dz));
    if (!dx.allFinite() || !dz.allFinite()) return finish(IpmStatus::kStalled, it);

    x += ap * dx;
    s += ap * ds;
    z += ad * dz;
    if (q > 0) y += ad * dy;

    // Guard against slacks collapsing to exact zero under rounding.
    s = s.cwiseMax(std::numeric_limits<double>::min());
    z = z.cwiseMax(std::numeric_limits<double>::min());

    if (ap < 1e-10 && ad < 1e-10) {
      if (++stalled_steps >= 3) return finish(IpmStatus::kStalled, it + 1);
    } else {
      stalled_steps = 0;
    }
  }
}

std::optional<VertexGuess> crossover(const InequalityLp& lp, const VectorXd& s, const VectorXd& z) {
  const Index n = lp.num_vars();
  const Index m = lp.num_ineq();
  const Index q = lp.num_eq();
  if (q > n) return std::nullopt;
  const VectorXd g_norm = row_norms(lp.G);

  MatrixXd basis(n, n);  // orthonormal rows spanning the chosen rows
  Index rank = 0;
  auto try_add = [&](const VectorXd& row) {
    VectorXd r = row / row.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Index k = 0; k < rank; ++k) r -= basis.row(k).dot(r) * basis.row(k).transpose();
    const double nr = r.norm();
    if (nr < 1e-7) return false;
    basis.row(rank++) = r / nr;
    return true;
  };

  MatrixXd M(n, n);
  VectorXd rhs(n);
  for (Index i = 0; i < q; ++i) {
    const VectorXd row = VectorXd(lp.A.row(i).transpose());
    if (!try_add(row)) return std::nullopt;
    M.row(i) = row.transpose();
    rhs[i] = lp.b[i];
  }

  std::vector<Index> order(static_cast<std::size_t>(m));
  std::vector<double> ratio(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    order[static_cast<std::size_t>(i)] = i;
    const double ss = s[i] / g_norm[i], zz = z[i] * g_norm[i];
    ratio[static_cast<std::size_t>(i)] = zz > 0.0 ? ss / zz : std::numeric_limits<double>::infinity();
  }
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double ra = ratio[static_cast<std::size_t>(a)], rb = ratio[static_cast<std::size_t>(b)];
    return ra < rb || (ra == rb && a < b);
  });

  std::vector<Index> chosen;
  for (Index i : order) {
    if (rank == n) break;
    const VectorXd row = VectorXd(lp.G.row(i).transpose());
    if (row.squaredNorm() == 0.0) continue;
    if (!try_add(row)) continue;
    M.row(q + static_cast<Index>(chosen.size())) = row.transpose();
    rhs[q + static_cast<Index>(chosen.size())] = lp.h[i];
    chosen.push_back(i);
  }
  if (rank < n) return std::nullopt;

  Eigen::FullPivLU<MatrixXd> lu(M);
  if (!lu.isInvertible()) return std::nullopt;
  VertexGuess out;
  out.x = lu.solve(rhs);
  const VectorXd mult = lu.transpose().solve(VectorXd(-lp.c));
  if (!out.x.allFinite() || !mult.allFinite()) return std::nullopt;
  out.y = mult.head(q);
  out.z = VectorXd::Zero(m);
  for (std::size_t k = 0; k < chosen.size(); ++k) out.z[chosen[k]] = mult[q + static_cast<Index>(k)];
  out.basis = std::move(chosen);
  return out;
}

}  // namespace nestedcuts
