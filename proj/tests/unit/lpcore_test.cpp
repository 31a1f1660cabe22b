#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nestedcuts/stage_lp.hpp"
#include "support/random_lp.hpp"
#include "support/vertex_oracle.hpp"

namespace nestedcuts {
namespace {

using testing::random_stage_lp;
using testing::RandomLpShape;
using testing::vertex_enumeration_optimum;

void expect_exactly_feasible(const LpDual& d, const StageLp& lp) {
  EXPECT_GE(d.alpha.minCoeff(), 0.0);
  EXPECT_GE(d.delta.minCoeff(), 0.0);
  EXPECT_GE(d.nu.minCoeff(), 0.0);
  if (d.mu.size() > 0) EXPECT_GE(d.mu.minCoeff(), 0.0);
  EXPECT_NEAR(d.alpha.sum(), 1.0, 1e-12);
  EXPECT_NEAR(d.delta.sum(), 1.0, 1e-12);
  EXPECT_LE(dual_stationarity_residual(d, lp).cwiseAbs().maxCoeff(), 1e-12);
}

// min x s.t. x >= 1 over [0, 10], written as f >= x, 1 - x <= 0, theta >= 0.
StageLp bound_active_lp() {
  StageLp lp;
  lp.obj_a = Matrix::Constant(1, 1, 1.0);
  lp.obj_b = Matrix::Zero(1, 1);
  lp.obj_c = Vector::Zero(1);
  lp.con_d = Matrix::Constant(1, 1, -1.0);
  lp.con_e = Matrix::Zero(1, 1);
  lp.con_h = Vector::Constant(1, 1.0);
  lp.ctg_beta = Matrix::Zero(1, 1);
  lp.ctg_theta = Vector::Zero(1);
  lp.cpl_a = Matrix(0, 1);
  lp.cpl_b = Matrix(0, 1);
  lp.cpl_b_rhs = Vector(0);
  lp.lo = Vector::Zero(1);
  lp.hi = Vector::Constant(1, 10.0);
  lp.x_prev = Vector::Zero(1);
  return lp;
}

StageLp three_by_two_lp() {
  std::mt19937_64 gen(2024);
  RandomLpShape s;
  s.n = 2;
  s.objective_rows = 3;
  s.constraint_rows = 2;
  s.cost_to_go_rows = 1;
  return random_stage_lp(gen, s);
}

TEST(LpSolve, OneDimensionalBoundActive) {
  const LpSolution sol = lp_solve(bound_active_lp(), 1e-10);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-8);
  EXPECT_NEAR(sol.primal_value, 1.0, 1e-9);
  EXPECT_NEAR(sol.dual_value, 1.0, 1e-9);
  EXPECT_LE(sol.rel_gap, 1e-10);
  EXPECT_EQ(sol.status, LpStatus::kOptimal);
}

TEST(LpSolve, MatchesVertexEnumeration) {
  const StageLp lp = three_by_two_lp();
  const auto opt = vertex_enumeration_optimum(lp);
  ASSERT_TRUE(opt);
  const LpSolution sol = lp_solve(lp, 1e-10);
  EXPECT_NEAR(sol.primal_value, opt->value, 1e-8);
  EXPECT_NEAR(sol.dual_value, opt->value, 1e-8);
  expect_exactly_feasible(sol.dual, lp);
}

TEST(LpSolve, LooseToleranceStaysWithinEps) {
  const StageLp lp = three_by_two_lp();
  const double opt = vertex_enumeration_optimum(lp)->value;
  const LpSolution sol = lp_solve(lp, 0.5);
  EXPECT_LE(sol.primal_value - opt, 0.5 * std::max(1.0, std::abs(opt)) + 1e-12);
  EXPECT_GE(sol.primal_value, opt - 1e-9);
  EXPECT_LE(sol.dual_value, opt + 1e-9);
  EXPECT_LE(duality_gap(sol), 0.5);
  expect_exactly_feasible(sol.dual, lp);
}

TEST(LpSolve, GapMeasureAbsolute) {
  const StageLp lp = three_by_two_lp();
  const LpSolution sol = lp_solve(lp, 0.25, GapMeasure::kAbsolute);
  EXPECT_LE(sol.abs_gap(), 0.25);
}

TEST(LpSolve, HugeToleranceGap) {
  const LpSolution sol = lp_solve(three_by_two_lp(), 10.0);
  EXPECT_LE(duality_gap(sol), 10.0);
  EXPECT_LE(sol.dual_value, sol.primal_value);
}

TEST(LpSolve, ExactSolveHasNegligibleGap) {
  EXPECT_LE(duality_gap(lp_solve(three_by_two_lp(), 1e-10)), 1e-10);
}

TEST(LpSolve, IterationCapReportsAchievedGap) {
  const StageLp lp = three_by_two_lp();
  const LpSolution sol = lp_solve(lp, 1e-10, GapMeasure::kRelative, 2);
  EXPECT_DOUBLE_EQ(sol.rel_gap,
                   (sol.primal_value - sol.dual_value) / std::max(1.0, std::abs(sol.primal_value)));
  if (sol.status == LpStatus::kOptimal) {
    EXPECT_LE(sol.rel_gap, 1e-10);
  } else {
    EXPECT_GT(sol.rel_gap, 1e-10);
  }
  expect_exactly_feasible(sol.dual, lp);
}

TEST(LpSolve, RejectsTinyEps) {
  EXPECT_THROW(lp_solve(bound_active_lp(), 1e-11), std::invalid_argument);
}

TEST(LpSolve, DetectsInfeasibility) {
  StageLp lp = bound_active_lp();
  lp.con_h[0] = 20.0;  // x >= 20 outside [0, 10]
  EXPECT_THROW(lp_solve(lp, 1e-9), InfeasibleLp);
}

TEST(LpSolve, ValidatesBlocks) {
  StageLp lp = bound_active_lp();
  lp.obj_c = Vector(0);
  lp.obj_a = Matrix(0, 1);
  lp.obj_b = Matrix(0, 1);
  EXPECT_THROW(lp.validate(), std::invalid_argument);
  StageLp bad = bound_active_lp();
  bad.con_e = Matrix::Zero(2, 1);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(LpSolve, CouplingRowsRespected) {
  std::mt19937_64 gen(99);
  RandomLpShape s;
  s.n = 3;
  s.objective_rows = 3;
  s.constraint_rows = 1;
  s.cost_to_go_rows = 2;
  s.coupling_rows = 1;
  const StageLp lp = random_stage_lp(gen, s);
  const LpSolution sol = lp_solve(lp, 1e-10);
  const double resid = (lp.cpl_a * sol.x + lp.cpl_b * lp.x_prev - lp.cpl_b_rhs).cwiseAbs().maxCoeff();
  EXPECT_LE(resid, kPrimalFeasTol);
  EXPECT_NEAR(sol.primal_value, vertex_enumeration_optimum(lp)->value, 1e-8);
}

TEST(DualRepair, ExactDualIsFixedPoint) {
  const StageLp lp = three_by_two_lp();
  const LpDual d = lp_solve(lp, 1e-10).dual;
  const LpDual again = dual_repair(d, lp);
  EXPECT_LE((again.alpha - d.alpha).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((again.mu - d.mu).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((again.delta - d.delta).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((again.nu - d.nu).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DualRepair, ResidualAbsorbedIntoBoxMultipliers) {
  const StageLp lp = three_by_two_lp();
  const LpDual exact = lp_solve(lp, 1e-10).dual;
  // Raising nu_hi[0] by 0.1 and nu_lo[1] by 0.2 leaves residual (0.1, -0.2).
  LpDual raw = exact;
  raw.nu[2 + 0] += 0.1;
  raw.nu[1] += 0.2;
  const Vector r = dual_stationarity_residual(raw, lp);
  EXPECT_NEAR(r[0], 0.1, 1e-12);
  EXPECT_NEAR(r[1], -0.2, 1e-12);
  const LpDual fixed = dual_repair(raw, lp);
  const Vector gain = fixed.nu - raw.nu;
  EXPECT_NEAR(gain[0], 0.1, 1e-12);
  EXPECT_NEAR(gain[1], 0.0, 1e-12);
  EXPECT_NEAR(gain[2], 0.0, 1e-12);
  EXPECT_NEAR(gain[3], 0.2, 1e-12);
  expect_exactly_feasible(fixed, lp);
}

TEST(DualRepair, RescalesObjectiveMultipliers) {
  const StageLp lp = three_by_two_lp();
  const LpSolution sol = lp_solve(lp, 1e-10);
  LpDual raw = sol.dual;
  raw.alpha *= 0.98;
  const LpDual fixed = dual_repair(raw, lp);
  EXPECT_LE((fixed.alpha - sol.dual.alpha).cwiseAbs().maxCoeff(), 1e-12);
  expect_exactly_feasible(fixed, lp);
  EXPECT_LE(dual_objective(fixed, lp), sol.primal_value + 1e-9);
}

TEST(DualRepair, ClipsNegativeEntries) {
  const StageLp lp = three_by_two_lp();
  LpDual raw = lp_solve(lp, 1e-10).dual;
  raw.mu[0] = -0.3;
  raw.nu[0] = -1.0;
  expect_exactly_feasible(dual_repair(raw, lp), lp);
}

TEST(DualRepair, FailsWithoutObjectiveMass) {
  const StageLp lp = three_by_two_lp();
  LpDual raw = lp_solve(lp, 1e-10).dual;
  raw.alpha.setZero();
  EXPECT_THROW(dual_repair(raw, lp), RepairFailed);
  raw = lp_solve(lp, 1e-10).dual;
  raw.delta = -raw.delta;
  EXPECT_THROW(dual_repair(raw, lp), RepairFailed);
}

// Random small LPs against the enumeration oracle: repaired duals are exact
// lower bounds, weak duality holds and the recorded gap never increases.
TEST(LpSolveProperty, RandomLpsAgainstEnumeration) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const StageLp lp = random_stage_lp(gen, testing::random_shape(gen));
    const auto opt = vertex_enumeration_optimum(lp);
    ASSERT_TRUE(opt) << "trial " << trial;
    const double scale = std::max(1.0, std::abs(opt->value));
    for (double eps : {1e-8, 1e-3, 0.5}) {
      const LpSolution sol = lp_solve(lp, eps);
      EXPECT_LE(sol.dual_value, opt->value + 1e-9 * scale) << "trial " << trial;
      EXPECT_LE(sol.dual_value, sol.primal_value + 1e-9) << "trial " << trial;
      EXPECT_GE(sol.primal_value, opt->value - 1e-9 * scale) << "trial " << trial;
      EXPECT_LE(sol.rel_gap, eps) << "trial " << trial;
      expect_exactly_feasible(sol.dual, lp);
      for (std::size_t i = 1; i < sol.gap_history.size(); ++i) {
        EXPECT_LE(sol.gap_history[i], sol.gap_history[i - 1] + 1e-9) << "trial " << trial;
      }
    }
  }
}

TEST(CertifiedPrimal, LiftsEpigraphVariables) {
  const StageLp lp = bound_active_lp();
  double f = 0.0, theta = 0.0;
  EXPECT_DOUBLE_EQ(certified_primal_value(lp, Vector::Constant(1, 3.0), 1e-9, &f, &theta), 3.0);
  EXPECT_DOUBLE_EQ(f, 3.0);
  EXPECT_DOUBLE_EQ(theta, 0.0);
  EXPECT_TRUE(std::isinf(certified_primal_value(lp, Vector::Constant(1, 0.5), 1e-9)));
}

TEST(Recenter, KeepsGapAndDualAndImprovesSlack) {
  std::mt19937_64 gen(5);
  RandomLpShape s;
  s.n = 3;
  s.objective_rows = 2;
  s.constraint_rows = 3;
  s.cost_to_go_rows = 1;
  for (int trial = 0; trial < 20; ++trial) {
    const StageLp lp = random_stage_lp(gen, s);
    LpSolution sol = lp_solve(lp, 1e-3);
    const LpSolution before = sol;
    recenter_constraints(lp, sol, 1e-3);
    EXPECT_LE(sol.rel_gap, 1e-3);
    EXPECT_DOUBLE_EQ(sol.dual_value, before.dual_value);
    EXPECT_EQ(sol.dual.alpha, before.dual.alpha);
    auto min_slack = [&](const Vector& x) {
      const Vector v = lp.con_d * x + lp.con_e * lp.x_prev + lp.con_h;
      return -(v.array() / lp.con_d.rowwise().norm().array()).maxCoeff();
    };
    EXPECT_GE(min_slack(sol.x), min_slack(before.x) - 1e-12);
    EXPECT_LE(certified_primal_value(lp, sol.x, kPrimalFeasTol), sol.primal_value + 1e-12);
  }
}

TEST(WriteLpText, ListsEveryBlock) {
  std::ostringstream os;
  write_lp_text(os, three_by_two_lp());
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("STAGELP n 2 obj 3 con 2 ctg 1 cpl 0", 0), 0u);
  for (const char* tag : {"XPREV", "LO", "HI", "OBJ", "CON", "CTG", "END"}) {
    EXPECT_NE(s.find(tag), std::string::npos) << tag;
  }
}

}  // namespace
}  // namespace nestedcuts
