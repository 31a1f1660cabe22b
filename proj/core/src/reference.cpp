#include "nestedcuts/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nestedcuts/ipm.hpp"
#include "nestedcuts/simplex.hpp"

namespace nestedcuts {

namespace {

struct Node {
  std::size_t stage;
  std::size_t j;
  long parent;  // -1: the fixed incoming state
  double prob;
};

std::vector<OraclePtr> split_branches(const OraclePtr& fn) {
  if (const auto* m = dynamic_cast<const MaxOracle*>(fn.get())) return m->branches();
  return {fn};
}

}  // namespace

ReferenceEvaluator::ReferenceEvaluator(const Problem& problem, ReferenceOptions options)
    : problem_(&problem), options_(options) {
  const std::size_t T = problem.stage_count();
  pools_.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < child_count(problem, t); ++j) {
      const Realization& r = problem.realization(t, j);
      Pools p;
      for (const auto& b : split_branches(r.objective)) p.objective.push_back({b, {}});
      for (const auto& g : r.constraints)
        for (const auto& b : split_branches(g)) p.constraint.push_back({b, {}});
      const Vector x = problem.state_set(t).midpoint();
      const Vector xp = t == 0 ? problem.x0() : problem.state_set(t - 1).midpoint();
      for (auto& piece : p.objective) piece.cuts.push_back(oracle_linearize(*piece.fn, x, xp));
      pools_[t].push_back(std::move(p));
    }
  }
}

std::size_t ReferenceEvaluator::node_count(std::size_t t) const {
  std::size_t layer = 1, total = 0;
  for (std::size_t s = t; s < problem_->stage_count(); ++s) {
    layer *= child_count(*problem_, s);
    total += layer;
    if (total > options_.max_nodes) return total;
  }
  return total;
}

ReferenceResult ReferenceEvaluator::solve_from(std::size_t t0, const Vector& x_prev) {
  const Problem& pb = *problem_;
  const std::size_t T = pb.stage_count();
  if (t0 >= T) throw std::out_of_range("ReferenceEvaluator: stage out of range");
  if (node_count(t0) > options_.max_nodes)
    throw TreeTooLarge("reference tree has more than " + std::to_string(options_.max_nodes) + " nodes");

  std::vector<Node> nodes;
  std::vector<std::size_t> layer_begin{0};
  for (std::size_t j = 0; j < child_count(pb, t0); ++j)
    nodes.push_back({t0, j, -1, pb.realization(t0, j).prob});
  for (std::size_t s = t0 + 1; s < T; ++s) {
    const std::size_t b = layer_begin.back(), e = nodes.size();
    layer_begin.push_back(e);
    for (std::size_t p = b; p < e; ++p)
      for (std::size_t j = 0; j < child_count(pb, s); ++j)
        nodes.push_back({s, j, static_cast<long>(p), nodes[p].prob * pb.realization(s, j).prob});
  }

  const Eigen::Index n = static_cast<Eigen::Index>(pb.state_dim());
  const Eigen::Index width = n + 1;
  const Eigen::Index nv = static_cast<Eigen::Index>(nodes.size()) * width;
  auto xcol = [&](std::size_t i) { return static_cast<Eigen::Index>(i) * width; };

  ReferenceResult res;
  Eigen::VectorXd x_all = Eigen::VectorXd::Zero(nv);
  for (int it = 1; it <= options_.max_iterations; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> h;
    // First objective row and the upper box row of each node, for the
    // fallback basis below.
    std::vector<Eigen::Index> first_obj_row(nodes.size()), box_row(nodes.size());
    auto add_cut_row = [&](std::size_t i, const AffineCut& c, bool epigraph) {
      const Eigen::Index row = static_cast<Eigen::Index>(h.size());
      double rhs = -c.c;
      for (Eigen::Index k = 0; k < n; ++k)
        if (c.a[k] != 0.0) trip.emplace_back(row, xcol(i) + k, c.a[k]);
      if (nodes[i].parent < 0) {
        rhs -= c.b.dot(x_prev);
      } else {
        const Eigen::Index pc = xcol(static_cast<std::size_t>(nodes[i].parent));
        for (Eigen::Index k = 0; k < n; ++k)
          if (c.b[k] != 0.0) trip.emplace_back(row, pc + k, c.b[k]);
      }
      if (epigraph) trip.emplace_back(row, xcol(i) + n, -1.0);
      h.push_back(rhs);
    };
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Pools& p = pools_[nodes[i].stage][nodes[i].j];
      first_obj_row[i] = static_cast<Eigen::Index>(h.size());
      for (const auto& piece : p.objective)
        for (const auto& c : piece.cuts) add_cut_row(i, c, true);
      for (const auto& piece : p.constraint)
        for (const auto& c : piece.cuts) add_cut_row(i, c, false);
      const StateSet& box = pb.state_set(nodes[i].stage);
      box_row[i] = static_cast<Eigen::Index>(h.size());
      for (Eigen::Index k = 0; k < n; ++k) {
        trip.emplace_back(static_cast<Eigen::Index>(h.size()), xcol(i) + k, 1.0);
        h.push_back(box.hi[k]);
        trip.emplace_back(static_cast<Eigen::Index>(h.size()), xcol(i) + k, -1.0);
        h.push_back(-box.lo[k]);
      }
    }

    InequalityLp lp;
    lp.G.resize(static_cast<Eigen::Index>(h.size()), nv);
    lp.G.setFromTriplets(trip.begin(), trip.end());
    lp.h = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
    lp.A.resize(0, nv);
    lp.b.resize(0);
    lp.c = Eigen::VectorXd::Zero(nv);
    for (std::size_t i = 0; i < nodes.size(); ++i) lp.c[xcol(i) + n] = nodes[i].prob;

    IpmOptions io;
    io.rel_gap = 1e-11;
    io.feas_tol = 1e-10;
    const IpmResult ipm = solve_ipm(lp, io);
    if (ipm.status == IpmStatus::kInfeasible)
      throw NonConvergence("reference: outer linearization became infeasible");
    double lp_value = ipm.primal_objective;
    x_all = ipm.x;
    if (ipm.status != IpmStatus::kConverged) {
      // Degenerate cut sets can stall the interior point. Restart with the
      // dual simplex from a dual feasible basis: per node, its first
      // objective row (multiplier = node probability) and one box row per
      // coordinate absorbing the objective slopes of the node and of its
      // children.
      Matrix slope = Matrix::Zero(n, static_cast<Eigen::Index>(nodes.size()));
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Pools& p = pools_[nodes[i].stage][nodes[i].j];
        const AffineCut& c = p.objective.front().cuts.front();
        slope.col(static_cast<Eigen::Index>(i)) += nodes[i].prob * c.a;
        if (nodes[i].parent >= 0) slope.col(nodes[i].parent) += nodes[i].prob * c.b;
      }
      std::vector<Eigen::Index> basis;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        basis.push_back(first_obj_row[i]);
        for (Eigen::Index k = 0; k < n; ++k)
          basis.push_back(box_row[i] + 2 * k + (slope(k, static_cast<Eigen::Index>(i)) > 0.0 ? 1 : 0));
      }
      const SimplexResult sx = dual_simplex(lp, basis, 200000);
      if (sx.status != SimplexStatus::kOptimal)
        throw NonConvergence(std::string("reference: dual simplex ended with ") + to_string(sx.status));
      x_all = sx.x;
      lp_value = lp.c.dot(sx.x);
    }

    // Lift epigraph variables to their implied values so the model value is
    // exact for the returned point.
    double model_value = 0.0, true_value = 0.0, viol = 0.0;
    std::vector<Vector> xs(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const StateSet& box = pb.state_set(nodes[i].stage);
      xs[i] = box.clip(x_all.segment(xcol(i), n));
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Vector& xp = nodes[i].parent < 0 ? x_prev : xs[static_cast<std::size_t>(nodes[i].parent)];
      const Pools& p = pools_[nodes[i].stage][nodes[i].j];
      double phi = -std::numeric_limits<double>::infinity();
      for (const auto& piece : p.objective)
        for (const auto& c : piece.cuts) phi = std::max(phi, c(xs[i], xp));
      model_value += nodes[i].prob * phi;
      const Realization& r = pb.realization(nodes[i].stage, nodes[i].j);
      true_value += nodes[i].prob * r.objective->value(xs[i], xp);
      for (const auto& g : r.constraints) viol = std::max(viol, g->value(xs[i], xp));
    }
    // The LP optimum is the certified quantity; the lifted value only guards
    // against reporting a model value below it because of clipping.
    const double value = std::min(lp_value, model_value);
    res.history.push_back(value);
    res.value = value;
    res.cost_at_solution = true_value;
    res.max_violation = std::max(0.0, viol);
    res.iterations = it;
    res.first_layer.clear();
    for (std::size_t k = 0; k < child_count(pb, t0); ++k) res.first_layer.push_back(xs[k]);

    if (true_value - value <= options_.tol * std::max(1.0, std::abs(value)) &&
        viol <= options_.feas_tol)
      return res;

    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Vector& xp = nodes[i].parent < 0 ? x_prev : xs[static_cast<std::size_t>(nodes[i].parent)];
      add_cuts(pools_[nodes[i].stage][nodes[i].j], xs[i], xp);
    }
  }
  throw NonConvergence("reference: no convergence within " +
                       std::to_string(options_.max_iterations) + " rounds");
}

void ReferenceEvaluator::add_cuts(Pools& pools, const Vector& x, const Vector& x_prev) {
  for (auto& piece : pools.objective) {
    double model = -std::numeric_limits<double>::infinity();
    for (const auto& c : piece.cuts) model = std::max(model, c(x, x_prev));
    const double v = piece.fn->value(x, x_prev);
    if (v - model > 1e-12 * std::max(1.0, std::abs(v)))
      piece.cuts.push_back(oracle_linearize(*piece.fn, x, x_prev));
  }
  for (auto& piece : pools.constraint)
    if (piece.fn->value(x, x_prev) > 0.0) piece.cuts.push_back(oracle_linearize(*piece.fn, x, x_prev));
}

ReferenceResult kelley_reference_solve(const Problem& problem, ReferenceOptions options) {
  ReferenceEvaluator ev(problem, options);
  return ev.solve_from(0, problem.x0());
}

}  // namespace nestedcuts
