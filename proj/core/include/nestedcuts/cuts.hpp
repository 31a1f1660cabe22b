#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "nestedcuts/model.hpp"
#include "nestedcuts/stage_lp.hpp"

namespace nestedcuts {

/// Constant used for the loose initial minorants when nothing better is known.
inline constexpr double kLooseLowerBound = -1e9;

/// Polyhedral model max_l (a_l x_t + b_l x_{t-1} + c_l) of an objective or
/// constraint oracle. Never empty once constructed through PolyhedralModel.
class AffineBundle {
 public:
  explicit AffineBundle(std::size_t n) : n_(n) {}

  void add(AffineCut cut);
  std::size_t size() const { return cuts_.size(); }
  bool empty() const { return cuts_.empty(); }
  const AffineCut& operator[](std::size_t i) const { return cuts_[i]; }
  const std::vector<AffineCut>& cuts() const { return cuts_; }

  /// Pointwise maximum of the pieces.
  double evaluate(const Vector& x, const Vector& x_prev) const;

 private:
  std::size_t n_;
  std::vector<AffineCut> cuts_;
};

/// theta + beta . x_{t-1}
struct ValueCut {
  Vector beta;
  double theta = 0.0;
  int birth_iter = 0;

  double operator()(const Vector& x_prev) const;
};

/// Polyhedral lower model of an expected cost-to-go function.
class CostToGoBundle {
 public:
  explicit CostToGoBundle(std::size_t n) : n_(n) {}

  void add(ValueCut cut);
  /// Drops the cut with the smallest birth_iter (earliest inserted on ties).
  void remove_oldest();
  std::size_t size() const { return cuts_.size(); }
  const ValueCut& operator[](std::size_t i) const { return cuts_[i]; }
  const std::vector<ValueCut>& cuts() const { return cuts_; }

  double evaluate(const Vector& x_prev) const;

 private:
  std::size_t n_;
  std::vector<ValueCut> cuts_;
};

/// All polyhedral models of a problem. Stage indices are 0-based;
/// future_cost(t) is the model of the expected cost of stages t+1.. as a
/// function of x_t and is identically zero for the last stage.
class PolyhedralModel {
 public:
  /// Bundles start with one loose constant minorant each unless
  /// `seed_loose_minorants` is false (the caller then seeds them, e.g. with
  /// warm-start linearizations). Future-cost models start at
  /// `initial_future_bound` except the last, which is exactly zero.
  PolyhedralModel(const Problem& problem, bool seed_loose_minorants = true,
                  double initial_future_bound = kLooseLowerBound);

  std::size_t stage_count() const { return objective_.size(); }
  std::size_t state_dim() const { return n_; }
  std::size_t realization_count(std::size_t t) const { return objective_.at(t).size(); }

  AffineBundle& objective(std::size_t t, std::size_t j) { return objective_.at(t).at(j); }
  const AffineBundle& objective(std::size_t t, std::size_t j) const {
    return objective_.at(t).at(j);
  }
  AffineBundle& constraint(std::size_t t, std::size_t j, std::size_t i) {
    return constraints_.at(t).at(j).at(i);
  }
  const AffineBundle& constraint(std::size_t t, std::size_t j, std::size_t i) const {
    return constraints_.at(t).at(j).at(i);
  }
  std::size_t constraint_count(std::size_t t, std::size_t j) const {
    return constraints_.at(t).at(j).size();
  }
  CostToGoBundle& future_cost(std::size_t t) { return future_.at(t); }
  const CostToGoBundle& future_cost(std::size_t t) const { return future_.at(t); }

  std::size_t total_future_cuts() const;

 private:
  std::size_t n_;
  std::vector<std::vector<AffineBundle>> objective_;
  std::vector<std::vector<std::vector<AffineBundle>>> constraints_;
  std::vector<CostToGoBundle> future_;
};

/// Builds the stage-t LP for realization j at the incoming state x_prev from
/// the current models.
StageLp assemble_stage_lp(const PolyhedralModel& model, const Problem& problem, std::size_t t,
                          std::size_t j, const Vector& x_prev);

/// One child subproblem solve feeding a cost-to-go cut.
struct ChildSolve {
  double prob;
  const LpSolution* solution;
  const StageLp* lp;
};

/// Probability-weighted dual cut; valid whenever each child dual is
/// feasible, tight at x_prev when the duals are optimal.
ValueCut cut_from_duals(const std::vector<ChildSolve>& children, int birth_iter);

/// Oldest-cut selection for iteration k: while k lies in [keep, keep+window-1]
/// each future-cost bundle drops its oldest cut (call after the new cut was
/// added). window == 0 disables selection. Throws for keep < 1.
void cut_select_oldest(PolyhedralModel& model, int keep, int window, int k);

/// CSV snapshot: kind,t,j,birth_iter,c,a1..an,b1..bn with 1-based stage and
/// realization numbers. Cost-to-go rows use the stage number of the function
/// they bound (a function of the previous state), a = 0 and b = beta.
void write_bundles_csv(std::ostream& os, const PolyhedralModel& model);

}  // namespace nestedcuts
