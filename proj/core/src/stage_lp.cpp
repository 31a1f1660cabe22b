#include "nestedcuts/stage_lp.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/QR>

#include "nestedcuts/ipm.hpp"
#include "nestedcuts/simplex.hpp"

namespace nestedcuts {

using Eigen::Index;

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kIterationLimit: return "iteration_limit";
    case LpStatus::kStalled: return "stalled";
  }
  return "unknown";
}

void StageLp::validate() const {
  const Index nn = n();
  auto fail = [](const std::string& what) { throw std::invalid_argument("StageLp: " + what); };
  if (hi.size() != nn || x_prev.size() != nn) fail("box or x_prev size");
  if (objective_rows() < 1) fail("empty objective bundle");
  if (cost_to_go_rows() < 1) fail("empty cost-to-go bundle");
  if (obj_a.rows() != objective_rows() || obj_b.rows() != objective_rows() ||
      obj_a.cols() != nn || obj_b.cols() != nn) {
    fail("objective block shape");
  }
  if (con_d.rows() != constraint_rows() || con_e.rows() != constraint_rows() ||
      (constraint_rows() > 0 && (con_d.cols() != nn || con_e.cols() != nn))) {
    fail("constraint block shape");
  }
  if (ctg_beta.rows() != cost_to_go_rows() || ctg_beta.cols() != nn) fail("cost-to-go block shape");
  if (cpl_a.rows() != coupling_rows() || cpl_b.rows() != coupling_rows() ||
      (coupling_rows() > 0 && (cpl_a.cols() != nn || cpl_b.cols() != nn))) {
    fail("coupling block shape");
  }
  if (((hi - lo).array() < 0.0).any()) fail("lo > hi");
}

Vector dual_stationarity_residual(const LpDual& d, const StageLp& lp) {
  const Index n = lp.n();
  Vector r = lp.obj_a.transpose() * d.alpha + lp.ctg_beta.transpose() * d.delta;
  if (lp.constraint_rows() > 0) r += lp.con_d.transpose() * d.mu;
  if (lp.coupling_rows() > 0) r -= lp.cpl_a.transpose() * d.lambda;
  r -= d.nu.head(n) - d.nu.tail(n);
  return r;
}

double dual_objective(const LpDual& d, const StageLp& lp) {
  const Index n = lp.n();
  long double v = 0.0L;
  const Vector obj_rhs = lp.obj_b * lp.x_prev + lp.obj_c;
  for (Index i = 0; i < d.alpha.size(); ++i) v += static_cast<long double>(d.alpha[i]) * obj_rhs[i];
  if (lp.constraint_rows() > 0) {
    const Vector con_rhs = lp.con_e * lp.x_prev + lp.con_h;
    for (Index i = 0; i < d.mu.size(); ++i) v += static_cast<long double>(d.mu[i]) * con_rhs[i];
  }
  for (Index i = 0; i < d.delta.size(); ++i) {
    v += static_cast<long double>(d.delta[i]) * lp.ctg_theta[i];
  }
  if (lp.coupling_rows() > 0) {
    const Vector cpl_rhs = lp.cpl_b_rhs - lp.cpl_b * lp.x_prev;
    for (Index i = 0; i < d.lambda.size(); ++i) {
      v += static_cast<long double>(d.lambda[i]) * cpl_rhs[i];
    }
  }
  for (Index i = 0; i < n; ++i) {
    v += static_cast<long double>(d.nu[i]) * lp.lo[i];
    v -= static_cast<long double>(d.nu[n + i]) * lp.hi[i];
  }
  return static_cast<double>(v);
}

LpDual dual_repair(LpDual d, const StageLp& lp) {
  const Index n = lp.n();
  d.alpha = d.alpha.cwiseMax(0.0);
  d.mu = d.mu.cwiseMax(0.0);
  d.delta = d.delta.cwiseMax(0.0);
  d.nu = d.nu.cwiseMax(0.0);
  const double sa = d.alpha.sum();
  const double sd = d.delta.sum();
  if (!(sa > 0.0) || !(sd > 0.0) || !std::isfinite(sa) || !std::isfinite(sd)) {
    throw RepairFailed("dual_repair: alpha or delta has no positive mass");
  }
  d.alpha /= sa;
  d.delta /= sd;
  const Vector r = dual_stationarity_residual(d, lp);
  for (Index i = 0; i < n; ++i) {
    if (r[i] > 0.0) {
      d.nu[i] += r[i];
    } else {
      d.nu[n + i] -= r[i];
    }
  }
  return d;
}

double certified_primal_value(const StageLp& lp, const Vector& x_raw, double tol, double* f_out,
                              double* theta_out) {
  const Vector x = x_raw.cwiseMax(lp.lo).cwiseMin(lp.hi);
  if (lp.constraint_rows() > 0) {
    const Vector g = lp.con_d * x + lp.con_e * lp.x_prev + lp.con_h;
    if (g.maxCoeff() > tol) return std::numeric_limits<double>::infinity();
  }
  if (lp.coupling_rows() > 0) {
    const Vector e = lp.cpl_a * x + lp.cpl_b * lp.x_prev - lp.cpl_b_rhs;
    if (e.cwiseAbs().maxCoeff() > tol) return std::numeric_limits<double>::infinity();
  }
  const double f = (lp.obj_a * x + lp.obj_b * lp.x_prev + lp.obj_c).maxCoeff();
  const double theta = (lp.ctg_beta * x + lp.ctg_theta).maxCoeff();
  if (f_out) *f_out = f;
  if (theta_out) *theta_out = theta;
  return f + theta;
}

double duality_gap(const LpSolution& sol) { return sol.rel_gap; }

namespace {

InequalityLp to_inequality_form(const StageLp& lp) {
  const Index n = lp.n();
  const Index k1 = lp.objective_rows();
  const Index k2 = lp.constraint_rows();
  const Index k3 = lp.cost_to_go_rows();
  const Index q = lp.coupling_rows();
  const Index nv = n + 2;
  const Index m = k1 + k2 + k3 + 2 * n;

  InequalityLp out;
  out.c = Vector::Zero(nv);
  out.c[n] = 1.0;
  out.c[n + 1] = 1.0;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>((k1 + k2 + k3) * (n + 1) + 2 * n));
  out.h.resize(m);
  Index row = 0;
  auto push_dense = [&](const auto& coeffs) {
    for (Index j = 0; j < n; ++j) {
      if (coeffs[j] != 0.0) trips.emplace_back(row, j, coeffs[j]);
    }
  };
  const Vector obj_rhs = lp.obj_b * lp.x_prev + lp.obj_c;
  for (Index i = 0; i < k1; ++i, ++row) {
    push_dense(lp.obj_a.row(i));
    trips.emplace_back(row, n, -1.0);
    out.h[row] = -obj_rhs[i];
  }
  if (k2 > 0) {
    const Vector con_rhs = lp.con_e * lp.x_prev + lp.con_h;
    for (Index i = 0; i < k2; ++i, ++row) {
      push_dense(lp.con_d.row(i));
      out.h[row] = -con_rhs[i];
    }
  }
  for (Index i = 0; i < k3; ++i, ++row) {
    push_dense(lp.ctg_beta.row(i));
    trips.emplace_back(row, n + 1, -1.0);
    out.h[row] = -lp.ctg_theta[i];
  }
  for (Index i = 0; i < n; ++i, ++row) {
    trips.emplace_back(row, i, -1.0);
    out.h[row] = -lp.lo[i];
  }
  for (Index i = 0; i < n; ++i, ++row) {
    trips.emplace_back(row, i, 1.0);
    out.h[row] = lp.hi[i];
  }
  out.G.resize(m, nv);
  out.G.setFromTriplets(trips.begin(), trips.end());

  out.A.resize(q, nv);
  out.b.resize(q);
  if (q > 0) {
    std::vector<Eigen::Triplet<double>> eq;
    for (Index i = 0; i < q; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (lp.cpl_a(i, j) != 0.0) eq.emplace_back(i, j, lp.cpl_a(i, j));
      }
    }
    out.A.setFromTriplets(eq.begin(), eq.end());
    out.b = lp.cpl_b_rhs - lp.cpl_b * lp.x_prev;
  }
  return out;
}

double gap_measure(double primal, double dual, GapMeasure measure) {
  const double gap = primal - dual;
  return measure == GapMeasure::kAbsolute ? gap : gap / std::max(1.0, std::abs(primal));
}

}  // namespace

namespace {

// Interior iterations allowed after the simplex polish has produced an exact
// dual, waiting for an interior primal that meets the tolerance.
constexpr int kIterationsAfterPolish = 10;

}  // namespace

LpSolution lp_solve(const StageLp& lp, double eps, GapMeasure measure, int max_iterations) {
  lp.validate();
  if (!(eps >= 1e-10)) throw std::invalid_argument("lp_solve: eps must be >= 1e-10");
  const Index n = lp.n();
  const Index k1 = lp.objective_rows();
  const Index k2 = lp.constraint_rows();
  const Index k3 = lp.cost_to_go_rows();

  const InequalityLp ilp = to_inequality_form(lp);

  // Start at the box midpoint with f, theta strictly above their implied minima.
  Vector start(n + 2);
  start.head(n) = 0.5 * (lp.lo + lp.hi);
  const double f0 = (lp.obj_a * start.head(n) + lp.obj_b * lp.x_prev + lp.obj_c).maxCoeff();
  const double t0 = (lp.ctg_beta * start.head(n) + lp.ctg_theta).maxCoeff();
  start[n] = f0 + 0.1 * std::abs(f0) + 1.0;
  start[n + 1] = t0 + 0.1 * std::abs(t0) + 1.0;

  double rhs_scale = 1.0 + std::max(lp.lo.cwiseAbs().maxCoeff(), lp.hi.cwiseAbs().maxCoeff());
  if (k2 > 0) {
    rhs_scale += (lp.con_e * lp.x_prev + lp.con_h).cwiseAbs().maxCoeff();
  }
  if (lp.coupling_rows() > 0) {
    rhs_scale += (lp.cpl_b_rhs - lp.cpl_b * lp.x_prev).cwiseAbs().maxCoeff();
  }

  double best_primal = std::numeric_limits<double>::infinity();
  double best_dual = -std::numeric_limits<double>::infinity();
  LpSolution sol;
  sol.x = start.head(n);
  std::vector<double> history;

  auto split_dual = [&](const Vector& z, const Vector& y) {
    LpDual d;
    d.alpha = z.segment(0, k1);
    d.mu = z.segment(k1, k2);
    d.delta = z.segment(k1 + k2, k3);
    d.nu = z.segment(k1 + k2 + k3, 2 * n);
    d.lambda = -y;
    return d;
  };

  // Vertex primal from the simplex polish, used only when no interior
  // iterate meets the tolerance: interior points sit near the centre of the
  // optimal face, where the polyhedral models are most accurate.
  double vertex_primal = std::numeric_limits<double>::infinity();
  Vector vertex_x;
  double vertex_f = 0.0, vertex_theta = 0.0;

  auto consider_vertex = [&](const LpDual& raw, const Vector& xfull) {
    try {
      LpDual fixed = dual_repair(raw, lp);
      const double dv = dual_objective(fixed, lp);
      if (dv > best_dual) {
        best_dual = dv;
        sol.dual = std::move(fixed);
      }
    } catch (const RepairFailed&) {
    }
    vertex_primal = certified_primal_value(lp, xfull.head(n), kPrimalFeasTol, &vertex_f, &vertex_theta);
    vertex_x = xfull.head(n).cwiseMax(lp.lo).cwiseMin(lp.hi);
  };

  auto consider = [&](const LpDual& raw, const Vector& xfull) {
    try {
      LpDual fixed = dual_repair(raw, lp);
      const double dv = dual_objective(fixed, lp);
      if (dv > best_dual) {
        best_dual = dv;
        sol.dual = std::move(fixed);
      }
    } catch (const RepairFailed&) {
    }
    double f = 0.0, theta = 0.0;
    const double pv = certified_primal_value(lp, xfull.head(n), kPrimalFeasTol, &f, &theta);
    if (pv < best_primal) {
      best_primal = pv;
      sol.x = xfull.head(n).cwiseMax(lp.lo).cwiseMin(lp.hi);
      sol.f = f;
      sol.theta = theta;
    }
  };

  // Structural dual-feasible basis: the largest objective and cost-to-go
  // rows at the start point plus the box side matching each reduced cost.
  auto cold_basis = [&]() {
    std::vector<Index> basis;
    Index io = 0, ic = 0;
    (lp.obj_a * start.head(n) + lp.obj_b * lp.x_prev + lp.obj_c).maxCoeff(&io);
    (lp.ctg_beta * start.head(n) + lp.ctg_theta).maxCoeff(&ic);
    basis.push_back(io);
    basis.push_back(k1 + k2 + ic);
    const Vector v = lp.obj_a.row(io).transpose() + lp.ctg_beta.row(ic).transpose();
    for (Index i = 0; i < n; ++i) basis.push_back(k1 + k2 + k3 + (v[i] > 0.0 ? i : n + i));
    return basis;
  };

  bool polished = false;
  bool have_face = false;
  Matrix face;
  Vector face_rhs;
  Eigen::CompleteOrthogonalDecomposition<Matrix> face_qr;
  int polish_iteration = 0;
  int pivots = 0;
  // Finishes with dual simplex pivots; returns true on a primal
  // infeasibility certificate.
  auto polish = [&](const std::optional<VertexGuess>& guess) {
    polished = true;
    std::vector<Index> basis;
    if (guess) {
      if (const auto u = basis_multipliers(ilp, guess->basis)) {
        if ((u->tail(u->size() - lp.coupling_rows()).array() >= 0.0).all()) basis = guess->basis;
      }
    }
    if (basis.empty() && lp.coupling_rows() == 0) basis = cold_basis();
    if (basis.empty()) return false;
    const SimplexResult r = dual_simplex(ilp, basis);
    pivots += r.pivots;
    if (r.status == SimplexStatus::kInfeasible) return true;
    if (r.status != SimplexStatus::kSingular && r.z.size() == ilp.num_ineq()) {
      consider_vertex(split_dual(r.z, r.y), r.x);
      if (r.status == SimplexStatus::kOptimal) {
        // Rows carrying positive multipliers (plus equalities) span the affine
        // hull of the optimal face.
        const double zmax = r.z.cwiseAbs().maxCoeff();
        std::vector<Index> rows;
        for (Index b : r.basis)
          if (r.z[b] > 1e-12 * zmax) rows.push_back(b);
        const Index qq = ilp.num_eq();
        face.resize(qq + static_cast<Index>(rows.size()), n + 2);
        face_rhs.resize(face.rows());
        if (qq > 0) {
          face.topRows(qq) = Matrix(ilp.A);
          face_rhs.head(qq) = ilp.b;
        }
        for (std::size_t k = 0; k < rows.size(); ++k) {
          face.row(qq + static_cast<Index>(k)) = Vector(ilp.G.row(rows[k]).transpose()).transpose();
          face_rhs[qq + static_cast<Index>(k)] = ilp.h[rows[k]];
        }
        face_qr.compute(face);
        have_face = true;
      }
    }
    return false;
  };

  // Interior iterate moved onto the optimal face: exactly optimal when it
  // stays feasible, and as central as the iterate was.
  auto consider_projection = [&](const LpDual& raw, const Vector& xfull) {
    if (!have_face) return;
    const Vector d = face_qr.solve(Vector(face * xfull - face_rhs));
    if (!d.allFinite()) return;
    consider(raw, xfull - d);
  };

  auto monitor = [&](const IpmIterate& it) -> MonitorVerdict {
    const LpDual raw = split_dual(it.z, it.y);

    // Farkas test on the (mu, nu, lambda) part: a positive ray objective
    // proves the constraint system is empty.
    {
      LpDual ray = raw;
      ray.alpha.setZero();
      ray.delta.setZero();
      ray.mu = ray.mu.cwiseMax(0.0);
      ray.nu = ray.nu.cwiseMax(0.0);
      const Vector r = dual_stationarity_residual(ray, lp);
      for (Index i = 0; i < n; ++i) {
        if (r[i] > 0.0) ray.nu[i] += r[i]; else ray.nu[n + i] -= r[i];
      }
      const double ray_value = dual_objective(ray, lp);
      const double ray_mass = ray.mu.sum() + ray.nu.sum() + ray.lambda.cwiseAbs().sum();
      if (ray_mass > 0.0 && ray_value > 1e-9 * ray_mass * rhs_scale) {
        return MonitorVerdict::kInfeasible;
      }
    }

    consider(raw, it.x);

    // Near the optimum an active-set vertex usually certifies the gap far
    // below what the interior iterate reaches on its own.
    const double g_now = std::isfinite(best_primal) && std::isfinite(best_dual)
                             ? gap_measure(best_primal, best_dual, measure)
                             : std::numeric_limits<double>::infinity();
    if (!polished && g_now > eps && (g_now < 1e-6 || it.iteration >= 25)) {
      if (polish(crossover(ilp, it.s, it.z))) return MonitorVerdict::kInfeasible;
      polish_iteration = it.iteration;
    }
    consider_projection(raw, it.x);
    if (polished && it.iteration >= polish_iteration + kIterationsAfterPolish)
      return MonitorVerdict::kStop;

    if (std::isfinite(best_primal) && std::isfinite(best_dual)) {
      history.push_back(best_primal - best_dual);
      if (gap_measure(best_primal, best_dual, measure) <= eps) return MonitorVerdict::kStop;
    } else {
      history.push_back(std::numeric_limits<double>::infinity());
    }
    return MonitorVerdict::kContinue;
  };

  IpmOptions opts;
  opts.max_iterations = max_iterations;
  opts.x_start = start;
  const IpmResult res = solve_ipm(ilp, opts, monitor);

  if (res.status == IpmStatus::kInfeasible) {
    throw InfeasibleLp("lp_solve: stage LP is infeasible (Farkas certificate found)");
  }
  auto met_now = [&] {
    return std::isfinite(best_primal) && std::isfinite(best_dual) &&
           gap_measure(best_primal, best_dual, measure) <= eps;
  };
  bool met = met_now();
  if (!met && !polished && res.status != IpmStatus::kInfeasible) {
    if (polish(res.z.size() == ilp.num_ineq() ? crossover(ilp, res.s, res.z) : std::nullopt))
      throw InfeasibleLp("lp_solve: stage LP is infeasible (dual simplex ray)");
    if (res.x.size() == n + 2) consider_projection(split_dual(res.z, res.y), res.x);
    met = met_now();
  }
  if (!met && vertex_primal < best_primal) {
    best_primal = vertex_primal;
    sol.x = vertex_x;
    sol.f = vertex_f;
    sol.theta = vertex_theta;
    sol.vertex_primal = true;
    met = met_now();
  }
  if (std::isfinite(best_primal) && std::isfinite(best_dual) && !history.empty()) {
    const double g = best_primal - best_dual;
    if (g < history.back()) history.push_back(g);
  }
  // Absolute gaps are nonincreasing; one common scale keeps them so.
  if (std::isfinite(best_primal)) {
    const double scale = std::max(1.0, std::abs(best_primal));
    for (double& g : history) g /= scale;
  }
  if (!std::isfinite(best_primal)) {
    throw InfeasibleLp("lp_solve: no feasible primal point found within the iteration limit");
  }
  if (!std::isfinite(best_dual)) {
    throw RepairFailed("lp_solve: no repairable dual iterate");
  }
  sol.primal_value = best_primal;
  sol.dual_value = best_dual;
  sol.rel_gap = gap_measure(best_primal, best_dual, GapMeasure::kRelative);
  sol.iterations = res.iterations;
  sol.pivots = pivots;
  sol.gap_history = std::move(history);
  switch (met ? IpmStatus::kConverged : res.status) {
    case IpmStatus::kConverged: sol.status = LpStatus::kOptimal; break;
    case IpmStatus::kStalled: sol.status = LpStatus::kStalled; break;
    default: sol.status = LpStatus::kIterationLimit; break;
  }
  return sol;
}

void recenter_constraints(const StageLp& lp, LpSolution& sol, double eps, GapMeasure measure) {
  const Index n = lp.n();
  const Index k1 = lp.objective_rows();
  const Index k2 = lp.constraint_rows();
  if (k2 == 0) return;
  const InequalityLp base = to_inequality_form(lp);
  const Index m = base.num_ineq();

  // Variables (x, f, theta, s): maximise s subject to every constraint row
  // holding with normalised slack s and f + theta not exceeding the current
  // certified value.
  InequalityLp c;
  c.c = Vector::Zero(n + 3);
  c.c[n + 2] = -1.0;
  std::vector<Eigen::Triplet<double>> trips;
  for (Index r = 0; r < m; ++r) {
    for (SparseRowMatrix::InnerIterator it(base.G, r); it; ++it) trips.emplace_back(r, it.col(), it.value());
    if (r >= k1 && r < k1 + k2) {
      const double norm = lp.con_d.row(r - k1).norm();
      trips.emplace_back(r, n + 2, std::max(norm, 1e-12));
    }
  }
  trips.emplace_back(m, n, 1.0);
  trips.emplace_back(m, n + 1, 1.0);
  trips.emplace_back(m + 1, n + 2, 1.0);
  c.G.resize(m + 2, n + 3);
  c.G.setFromTriplets(trips.begin(), trips.end());
  c.h.resize(m + 2);
  c.h.head(m) = base.h;
  c.h[m] = sol.primal_value;
  c.h[m + 1] = (lp.hi - lp.lo).maxCoeff();
  c.A.resize(base.num_eq(), n + 3);
  if (base.num_eq() > 0) {
    std::vector<Eigen::Triplet<double>> eq;
    for (Index r = 0; r < base.num_eq(); ++r)
      for (SparseRowMatrix::InnerIterator it(base.A, r); it; ++it) eq.emplace_back(r, it.col(), it.value());
    c.A.setFromTriplets(eq.begin(), eq.end());
  }
  c.b = base.b;

  IpmOptions opts;
  opts.max_iterations = 60;
  opts.rel_gap = 1e-6;
  opts.feas_tol = 1e-9;
  opts.x_start = Vector::Zero(n + 3);
  opts.x_start.head(n) = sol.x;
  opts.x_start[n] = sol.f;
  opts.x_start[n + 1] = sol.theta;
  const IpmResult res = solve_ipm(c, opts);
  sol.iterations += res.iterations;
  if (res.x.size() != n + 3 || !res.x.allFinite()) return;

  // The objective bound is met only approximately, so step towards the
  // centre until the certified gap is within eps again.
  const Vector target = res.x.head(n).cwiseMax(lp.lo).cwiseMin(lp.hi);
  auto min_slack = [&](const Vector& x) {
    const Vector v = lp.con_d * x + lp.con_e * lp.x_prev + lp.con_h;
    double s = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < k2; ++r) s = std::min(s, -v[r] / std::max(lp.con_d.row(r).norm(), 1e-12));
    return s;
  };
  const double current = min_slack(sol.x);
  double tau = 1.0;
  for (int step = 0; step < 30; ++step, tau *= 0.5) {
    const Vector x = sol.x + tau * (target - sol.x);
    double f = 0.0, theta = 0.0;
    const double pv = certified_primal_value(lp, x, kPrimalFeasTol, &f, &theta);
    if (!std::isfinite(pv) || gap_measure(pv, sol.dual_value, measure) > eps) continue;
    if (min_slack(x) <= current) return;
    sol.x = x;
    sol.f = f;
    sol.theta = theta;
    sol.primal_value = pv;
    sol.rel_gap = gap_measure(pv, sol.dual_value, GapMeasure::kRelative);
    return;
  }
}

void write_lp_text(std::ostream& os, const StageLp& lp) {
  const Index n = lp.n();
  auto write_row = [&](const char* tag, Index i, const auto& a, const auto& b, double c) {
    os << tag << ' ' << i;
    for (Index j = 0; j < n; ++j) os << ' ' << a[j];
    os << " |";
    for (Index j = 0; j < n; ++j) os << ' ' << b[j];
    os << " | " << c << '\n';
  };
  os.precision(17);
  os << "STAGELP n " << n << " obj " << lp.objective_rows() << " con " << lp.constraint_rows()
     << " ctg " << lp.cost_to_go_rows() << " cpl " << lp.coupling_rows() << '\n';
  os << "XPREV";
  for (Index j = 0; j < n; ++j) os << ' ' << lp.x_prev[j];
  os << "\nLO";
  for (Index j = 0; j < n; ++j) os << ' ' << lp.lo[j];
  os << "\nHI";
  for (Index j = 0; j < n; ++j) os << ' ' << lp.hi[j];
  os << '\n';
  for (Index i = 0; i < lp.objective_rows(); ++i) {
    write_row("OBJ", i, lp.obj_a.row(i), lp.obj_b.row(i), lp.obj_c[i]);
  }
  for (Index i = 0; i < lp.constraint_rows(); ++i) {
    write_row("CON", i, lp.con_d.row(i), lp.con_e.row(i), lp.con_h[i]);
  }
  const Vector zeros = Vector::Zero(n);
  for (Index i = 0; i < lp.cost_to_go_rows(); ++i) {
    write_row("CTG", i, lp.ctg_beta.row(i), zeros, lp.ctg_theta[i]);
  }
  for (Index i = 0; i < lp.coupling_rows(); ++i) {
    write_row("CPL", i, lp.cpl_a.row(i), lp.cpl_b.row(i), lp.cpl_b_rhs[i]);
  }
  os << "END\n";
}

}  // namespace nestedcuts
