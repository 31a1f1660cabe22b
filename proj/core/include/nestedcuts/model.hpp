#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nestedcuts/rng.hpp"

namespace nestedcuts {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Value and one subgradient of a convex function of (x_t, x_{t-1}).
struct OracleValue {
  double value = 0.0;
  Vector grad_x;
  Vector grad_prev;
};

/// Affine function a.x_t + b.x_{t-1} + c. birth_iter is the iteration that
/// produced it (0 for initial and warm-start pieces).
struct AffineCut {
  Vector a;
  Vector b;
  double c = 0.0;
  int birth_iter = 0;

  double operator()(const Vector& x, const Vector& x_prev) const;
};

/// Convex function of the stage decision and the previous state for one
/// fixed noise realization. Implementations are immutable and thread-safe.
class ConvexOracle {
 public:
  virtual ~ConvexOracle() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const Vector& x, const Vector& x_prev) const = 0;
  virtual OracleValue evaluate(const Vector& x, const Vector& x_prev) const = 0;
};

using OraclePtr = std::shared_ptr<const ConvexOracle>;

class AffineOracle final : public ConvexOracle {
 public:
  AffineOracle(Vector a, Vector b, double c);

  std::size_t dim() const override { return a_.size(); }
  double value(const Vector& x, const Vector& x_prev) const override;
  OracleValue evaluate(const Vector& x, const Vector& x_prev) const override;

 private:
  Vector a_, b_;
  double c_;
};

/// (xi . (x_t + prev_weight * x_{t-1}))^2 + linear . x_t + constant.
///
/// The quadratic form xi xi^T is rank one and is never formed.
class ProjectedSquareOracle final : public ConvexOracle {
 public:
  ProjectedSquareOracle(Vector xi, double prev_weight, Vector linear, double constant);

  std::size_t dim() const override { return xi_.size(); }
  double value(const Vector& x, const Vector& x_prev) const override;
  OracleValue evaluate(const Vector& x, const Vector& x_prev) const override;

  const Vector& direction() const { return xi_; }
  double prev_weight() const { return prev_weight_; }
  const Vector& linear() const { return linear_; }
  double constant() const { return constant_; }

 private:
  Vector xi_;
  double prev_weight_;
  Vector linear_;
  double constant_;
};

/// scale * ||x_t - center||^2 + constant, scale >= 0.
class SquaredDistanceOracle final : public ConvexOracle {
 public:
  SquaredDistanceOracle(double scale, Vector center, double constant);

  std::size_t dim() const override { return center_.size(); }
  double value(const Vector& x, const Vector& x_prev) const override;
  OracleValue evaluate(const Vector& x, const Vector& x_prev) const override;

  double scale() const { return scale_; }
  const Vector& center() const { return center_; }
  double constant() const { return constant_; }

 private:
  double scale_;
  Vector center_;
  double constant_;
};

/// Pointwise maximum of convex branches. The reported subgradient is the
/// gradient of the branch with the largest value, ties going to the lowest
/// branch index.
class MaxOracle final : public ConvexOracle {
 public:
  explicit MaxOracle(std::vector<OraclePtr> branches);

  std::size_t dim() const override { return branches_.front()->dim(); }
  double value(const Vector& x, const Vector& x_prev) const override;
  OracleValue evaluate(const Vector& x, const Vector& x_prev) const override;

  const std::vector<OraclePtr>& branches() const { return branches_; }
  std::size_t active_branch(const Vector& x, const Vector& x_prev) const;

 private:
  std::vector<OraclePtr> branches_;
};

/// Oracle from callables; handy for tests and small hand-built problems.
class FunctionOracle final : public ConvexOracle {
 public:
  using ValueFn = std::function<double(const Vector&, const Vector&)>;
  using EvalFn = std::function<OracleValue(const Vector&, const Vector&)>;

  FunctionOracle(std::size_t dim, EvalFn eval);

  std::size_t dim() const override { return dim_; }
  double value(const Vector& x, const Vector& x_prev) const override;
  OracleValue evaluate(const Vector& x, const Vector& x_prev) const override;

 private:
  std::size_t dim_;
  EvalFn eval_;
};

/// Tight affine minorant of `oracle` at (x, x_prev):
/// c = value - a.x - b.x_prev with (a, b) the oracle subgradient.
AffineCut oracle_linearize(const ConvexOracle& oracle, const Vector& x, const Vector& x_prev,
                           int birth_iter = 0);

/// Box {x : lo <= x <= hi}, written as [I; -I] x >= [lo; -hi].
struct StateSet {
  Vector lo;
  Vector hi;

  std::size_t dim() const { return lo.size(); }
  bool contains(const Vector& x, double tol = 0.0) const;
  Vector midpoint() const { return 0.5 * (lo + hi); }
  Vector clip(const Vector& x) const;
  /// Right-hand side x_bar = [lo; -hi] of the inequality form.
  Vector rhs() const;
};

/// One noise realization of a stage.
struct Realization {
  double prob = 1.0;
  Vector xi;
  // Linear coupling A x_t + B x_{t-1} = b; zero rows when absent.
  Matrix A;
  Matrix B;
  Vector b;
  OraclePtr objective;
  std::vector<OraclePtr> constraints;

  std::size_t coupling_rows() const { return static_cast<std::size_t>(A.rows()); }
};

struct StageRandomness {
  std::vector<Realization> realizations;

  std::vector<double> probabilities() const;
};

/// Multistage problem under stagewise independence. Stage indices are
/// 0-based in code: stage 0 is the deterministic first stage.
class Problem {
 public:
  Problem(Vector x0, std::vector<StageRandomness> stages, std::vector<StateSet> state_sets);

  std::size_t stage_count() const { return stages_.size(); }
  std::size_t state_dim() const { return static_cast<std::size_t>(x0_.size()); }
  const Vector& x0() const { return x0_; }
  const StageRandomness& stage(std::size_t t) const { return stages_.at(t); }
  const Realization& realization(std::size_t t, std::size_t j) const {
    return stages_.at(t).realizations.at(j);
  }
  const StateSet& state_set(std::size_t t) const { return state_sets_.at(t); }
  bool deterministic() const;

 private:
  Vector x0_;
  std::vector<StageRandomness> stages_;
  std::vector<StateSet> state_sets_;
};

/// Realization index per stage; entry 0 is always 0.
std::vector<std::size_t> sample_path(const Problem& problem, CounterRng& rng);

/// Number of realizations M_t of stage t (0-based). Throws std::out_of_range.
std::size_t child_count(const Problem& problem, std::size_t t);

}  // namespace nestedcuts
