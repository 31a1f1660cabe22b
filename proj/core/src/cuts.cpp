#include "nestedcuts/cuts.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace nestedcuts {

void AffineBundle::add(AffineCut cut) {
  if (static_cast<std::size_t>(cut.a.size()) != n_ || static_cast<std::size_t>(cut.b.size()) != n_)
    throw std::invalid_argument("AffineBundle::add: cut dimension mismatch");
  cuts_.push_back(std::move(cut));
}

double AffineBundle::evaluate(const Vector& x, const Vector& x_prev) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : cuts_) best = std::max(best, c(x, x_prev));
  return best;
}

double ValueCut::operator()(const Vector& x_prev) const {
  long double acc = theta;
  for (Eigen::Index i = 0; i < beta.size(); ++i)
    acc += static_cast<long double>(beta[i]) * x_prev[i];
  return static_cast<double>(acc);
}

void CostToGoBundle::add(ValueCut cut) {
  if (static_cast<std::size_t>(cut.beta.size()) != n_)
    throw std::invalid_argument("CostToGoBundle::add: cut dimension mismatch");
  cuts_.push_back(std::move(cut));
}

void CostToGoBundle::remove_oldest() {
  if (cuts_.empty()) return;
  auto oldest = std::min_element(cuts_.begin(), cuts_.end(),
                                 [](const ValueCut& l, const ValueCut& r) {
                                   return l.birth_iter < r.birth_iter;
                                 });
  cuts_.erase(oldest);
}

double CostToGoBundle::evaluate(const Vector& x_prev) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : cuts_) best = std::max(best, c(x_prev));
  return best;
}

PolyhedralModel::PolyhedralModel(const Problem& problem, bool seed_loose_minorants,
                                 double initial_future_bound)
    : n_(problem.state_dim()) {
  const std::size_t T = problem.stage_count();
  const AffineCut loose{Vector::Zero(n_), Vector::Zero(n_), kLooseLowerBound, 0};
  objective_.resize(T);
  constraints_.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& reals = problem.stage(t).realizations;
    for (const auto& r : reals) {
      objective_[t].emplace_back(n_);
      if (seed_loose_minorants) objective_[t].back().add(loose);
      constraints_[t].emplace_back();
      for (std::size_t i = 0; i < r.constraints.size(); ++i) {
        constraints_[t].back().emplace_back(n_);
        if (seed_loose_minorants) constraints_[t].back().back().add(loose);
      }
    }
    future_.emplace_back(n_);
    const bool last = t + 1 == T;
    future_.back().add(ValueCut{Vector::Zero(n_), last ? 0.0 : initial_future_bound, 0});
  }
}

std::size_t PolyhedralModel::total_future_cuts() const {
  std::size_t total = 0;
  for (const auto& q : future_) total += q.size();
  return total;
}

StageLp assemble_stage_lp(const PolyhedralModel& model, const Problem& problem, std::size_t t,
                          std::size_t j, const Vector& x_prev) {
  const std::size_t n = model.state_dim();
  const Eigen::Index ni = static_cast<Eigen::Index>(n);
  const Realization& real = problem.realization(t, j);
  StageLp lp;

  const AffineBundle& obj = model.objective(t, j);
  const auto k1 = static_cast<Eigen::Index>(obj.size());
  lp.obj_a.resize(k1, ni);
  lp.obj_b.resize(k1, ni);
  lp.obj_c.resize(k1);
  for (Eigen::Index r = 0; r < k1; ++r) {
    const AffineCut& c = obj[static_cast<std::size_t>(r)];
    lp.obj_a.row(r) = c.a.transpose();
    lp.obj_b.row(r) = c.b.transpose();
    lp.obj_c[r] = c.c;
  }

  Eigen::Index k2 = 0;
  for (std::size_t i = 0; i < model.constraint_count(t, j); ++i)
    k2 += static_cast<Eigen::Index>(model.constraint(t, j, i).size());
  lp.con_d.resize(k2, ni);
  lp.con_e.resize(k2, ni);
  lp.con_h.resize(k2);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < model.constraint_count(t, j); ++i) {
    for (const AffineCut& c : model.constraint(t, j, i).cuts()) {
      lp.con_d.row(row) = c.a.transpose();
      lp.con_e.row(row) = c.b.transpose();
      lp.con_h[row] = c.c;
      ++row;
    }
  }

  const CostToGoBundle& q = model.future_cost(t);
  const auto k3 = static_cast<Eigen::Index>(q.size());
  lp.ctg_beta.resize(k3, ni);
  lp.ctg_theta.resize(k3);
  for (Eigen::Index r = 0; r < k3; ++r) {
    lp.ctg_beta.row(r) = q[static_cast<std::size_t>(r)].beta.transpose();
    lp.ctg_theta[r] = q[static_cast<std::size_t>(r)].theta;
  }

  const auto qrows = static_cast<Eigen::Index>(real.coupling_rows());
  if (qrows > 0) {
    lp.cpl_a = real.A;
    lp.cpl_b = real.B;
    lp.cpl_b_rhs = real.b;
  } else {
    lp.cpl_a.resize(0, ni);
    lp.cpl_b.resize(0, ni);
    lp.cpl_b_rhs.resize(0);
  }

  lp.lo = problem.state_set(t).lo;
  lp.hi = problem.state_set(t).hi;
  lp.x_prev = x_prev;
  lp.validate();
  return lp;
}

ValueCut cut_from_duals(const std::vector<ChildSolve>& children, int birth_iter) {
  if (children.empty()) throw std::invalid_argument("cut_from_duals: no children");
  const Eigen::Index n = children.front().lp->n();
  std::vector<long double> beta(static_cast<std::size_t>(n), 0.0L);
  long double theta = 0.0L;

  auto dot = [](const Vector& u, const Vector& v) {
    long double s = 0.0L;
    for (Eigen::Index i = 0; i < u.size(); ++i) s += static_cast<long double>(u[i]) * v[i];
    return s;
  };

  for (const ChildSolve& ch : children) {
    const StageLp& lp = *ch.lp;
    const LpDual& d = ch.solution->dual;
    if (lp.n() != n) throw std::invalid_argument("cut_from_duals: dimension mismatch");
    const long double p = ch.prob;

    Vector g = lp.obj_b.transpose() * d.alpha;
    if (lp.constraint_rows() > 0) g += lp.con_e.transpose() * d.mu;
    if (lp.coupling_rows() > 0) g -= lp.cpl_b.transpose() * d.lambda;
    for (Eigen::Index i = 0; i < n; ++i) beta[static_cast<std::size_t>(i)] += p * g[i];

    Vector xbar(2 * n);
    xbar << lp.lo, -lp.hi;
    long double c = dot(d.alpha, lp.obj_c) + dot(d.mu, lp.con_h) + dot(d.delta, lp.ctg_theta) +
                    dot(d.lambda, lp.cpl_b_rhs) + dot(d.nu, xbar);
    theta += p * c;
  }

  ValueCut cut;
  cut.beta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) cut.beta[i] = static_cast<double>(beta[static_cast<std::size_t>(i)]);
  cut.theta = static_cast<double>(theta);
  cut.birth_iter = birth_iter;
  return cut;
}

void cut_select_oldest(PolyhedralModel& model, int keep, int window, int k) {
  if (keep < 1) throw std::invalid_argument("cut_select_oldest: keep must be >= 1");
  if (window <= 0) return;
  if (k < keep || k > keep + window - 1) return;
  // The last stage carries the fixed zero function and is never selected.
  for (std::size_t t = 0; t + 1 < model.stage_count(); ++t) model.future_cost(t).remove_oldest();
}

namespace {

void put_double(std::ostream& os, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, res.ptr - buf);
}

void put_row(std::ostream& os, const std::string& kind, std::size_t t, const std::string& j,
             int birth, double c, const Vector& a, const Vector& b) {
  os << kind << ',' << t << ',' << j << ',' << birth << ',';
  put_double(os, c);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    os << ',';
    put_double(os, a[i]);
  }
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    os << ',';
    put_double(os, b[i]);
  }
  os << '\n';
}

}  // namespace

void write_bundles_csv(std::ostream& os, const PolyhedralModel& model) {
  const std::size_t n = model.state_dim();
  os << "kind,t,j,birth_iter,c";
  for (std::size_t i = 1; i <= n; ++i) os << ",a" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",b" << i;
  os << '\n';
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < model.stage_count(); ++t) {
    for (std::size_t j = 0; j < model.realization_count(t); ++j) {
      const AffineBundle* obj = &model.objective(t, j);
      const std::string js = std::to_string(j + 1);
      for (const auto& c : obj->cuts()) put_row(os, "objective", t + 1, js, c.birth_iter, c.c, c.a, c.b);
      for (std::size_t i = 0; i < model.constraint_count(t, j); ++i)
        for (const auto& c : model.constraint(t, j, i).cuts())
          put_row(os, "constraint_" + std::to_string(i + 1), t + 1, js, c.birth_iter, c.c, c.a, c.b);
    }
  }
  for (std::size_t t = 0; t < model.stage_count(); ++t)
    for (const auto& c : model.future_cost(t).cuts())
      put_row(os, "cost_to_go", t + 2, "", c.birth_iter, c.theta, zero, c.beta);
}

}  // namespace nestedcuts
