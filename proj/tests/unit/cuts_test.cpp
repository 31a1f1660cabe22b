#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "nestedcuts/cuts.hpp"
#include "nestedcuts/instances.hpp"
#include "nestedcuts/stodcup.hpp"
#include "support/small_problems.hpp"
#include "support/vertex_oracle.hpp"

namespace nestedcuts {
namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

AffineCut line(double a, double c, int birth = 0) { return {scalar(a), scalar(0.0), c, birth}; }

TEST(AffineBundle, SingleZeroCut) {
  AffineBundle b(1);
  b.add(line(0.0, 0.0));
  for (double x : {-3.0, 0.0, 7.5}) EXPECT_EQ(b.evaluate(scalar(x), scalar(1.0)), 0.0);
}

TEST(AffineBundle, MaxOfTwoLines) {
  AffineBundle b(1);
  b.add(line(1.0, 0.0));
  b.add(line(-1.0, 2.0));
  EXPECT_DOUBLE_EQ(b.evaluate(scalar(0.5), scalar(0.0)), 1.5);
}

TEST(AffineBundle, TightAfterLinearization) {
  const SquaredDistanceOracle sq(2.0, Vector::Zero(1), 1.0);
  AffineBundle b(1);
  b.add(line(0.0, kLooseLowerBound));
  b.add(oracle_linearize(sq, scalar(0.3), scalar(0.0)));
  EXPECT_DOUBLE_EQ(b.evaluate(scalar(0.3), scalar(0.0)), sq.value(scalar(0.3), scalar(0.0)));
}

TEST(AffineBundle, DuplicateCutLeavesValuesUnchanged) {
  AffineBundle b(1);
  b.add(line(1.0, 0.0));
  b.add(line(-2.0, 1.0));
  AffineBundle twice = b;
  twice.add(line(-2.0, 1.0));
  EXPECT_EQ(twice.size(), 3u);
  for (double x = -5.0; x <= 5.0; x += 0.25)
    EXPECT_EQ(twice.evaluate(scalar(x), scalar(0.0)), b.evaluate(scalar(x), scalar(0.0)));
}

TEST(AffineBundle, CutBelowMaxChangesNothing) {
  AffineBundle b(2);
  b.add({Vector::Constant(2, 1.0), Vector::Zero(2), 5.0, 0});
  b.add({Vector::Constant(2, -1.0), Vector::Zero(2), 5.0, 0});
  AffineBundle more = b;
  // |x1 + x2| + 5 >= 5 > 4 + 0.5 x1 on the test box.
  more.add({(Vector(2) << 0.5, 0.0).finished(), Vector::Zero(2), 2.0, 1});
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> U(-4, 4);
  for (int i = 0; i < 100; ++i) {
    const Vector x = Vector::NullaryExpr(2, [&] { return U(gen); });
    EXPECT_EQ(more.evaluate(x, Vector::Zero(2)), b.evaluate(x, Vector::Zero(2)));
  }
}

TEST(AffineBundle, RejectsWrongDimension) {
  AffineBundle b(2);
  EXPECT_THROW(b.add(line(1.0, 0.0)), std::invalid_argument);
}

TEST(CostToGoBundle, RemoveOldestPicksSmallestBirth) {
  CostToGoBundle q(1);
  q.add({scalar(0.0), 1.0, 3});
  q.add({scalar(0.0), 2.0, 1});
  q.add({scalar(0.0), 3.0, 1});
  q.remove_oldest();
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0].theta, 1.0);
  EXPECT_EQ(q[1].theta, 3.0);
}

TEST(PolyhedralModel, InitialBundles) {
  const Problem pb = generate_instance(3, 2, 2, 1);
  const PolyhedralModel m(pb);
  EXPECT_EQ(m.objective(1, 1).size(), 1u);
  EXPECT_EQ(m.objective(1, 1)[0].c, kLooseLowerBound);
  EXPECT_EQ(m.constraint_count(2, 0), 1u);
  EXPECT_EQ(m.future_cost(0)[0].theta, kLooseLowerBound);
  EXPECT_EQ(m.future_cost(2)[0].theta, 0.0);
  EXPECT_EQ(m.future_cost(2)[0].beta, Vector::Zero(2));
  EXPECT_EQ(PolyhedralModel(pb, false).objective(0, 0).size(), 0u);
}

TEST(AssembleStageLp, TerminalStageHasZeroCostToGo) {
  auto f = std::make_shared<AffineOracle>(scalar(1.0), scalar(0.0), 0.0);
  auto g = std::make_shared<AffineOracle>(scalar(-1.0), scalar(0.0), 0.5);
  std::vector<StageRandomness> stages(1);
  stages[0].realizations.push_back(testing::realization(1.0, f, {g}));
  const Problem pb(Vector::Zero(1), stages, {testing::box(1, -1, 1)});
  PolyhedralModel m(pb, false);
  m.objective(0, 0).add(oracle_linearize(*f, scalar(0.0), scalar(0.0)));
  m.constraint(0, 0, 0).add(oracle_linearize(*g, scalar(0.0), scalar(0.0)));
  const StageLp lp = assemble_stage_lp(m, pb, 0, 0, Vector::Zero(1));
  EXPECT_EQ(lp.objective_rows(), 1);
  EXPECT_EQ(lp.constraint_rows(), 1);
  EXPECT_EQ(lp.cost_to_go_rows(), 1);
  EXPECT_EQ(lp.ctg_theta[0], 0.0);
  EXPECT_EQ(lp.ctg_beta(0, 0), 0.0);
  // min x s.t. 0.5 - x <= 0 on [-1, 1]
  const LpSolution sol = lp_solve(lp, 1e-9);
  EXPECT_NEAR(sol.x[0], 0.5, 1e-7);
  EXPECT_NEAR(sol.theta, 0.0, 1e-7);
}

TEST(AssembleStageLp, WarmStartPlusIterationsCountsRows) {
  const Problem pb = generate_instance(3, 2, 1, 2);
  SolverState st(pb, false);
  CounterRng rng(1, RngStream::kWarmStart);
  warm_start(st, 20, rng);
  for (int k = 0; k < 5; ++k)
    forward_pass(st, {0, 0, 0}, 1e-9, 1e-9, GapMeasure::kRelative);
  for (std::size_t t = 0; t < 3; ++t) {
    const StageLp lp = assemble_stage_lp(st.model, pb, t, 0, pb.x0());
    EXPECT_EQ(lp.objective_rows(), 25);
    EXPECT_EQ(lp.constraint_rows(), 25);
    // Initial cut plus one per iteration, none at the last stage.
    EXPECT_EQ(lp.cost_to_go_rows(), t == 2 ? 1 : 6);
  }
}

TEST(AssembleStageLp, EveryChildGetsOneLinearizationPerIteration) {
  const Problem pb = generate_instance(3, 2, 3, 2);
  SolverState st(pb, false);
  CounterRng rng(1, RngStream::kWarmStart);
  warm_start(st, 4, rng);
  CounterRng paths(1, RngStream::kPathSampling);
  for (int k = 0; k < 7; ++k) forward_pass(st, sample_path(pb, paths), 1e-9, 1e-9, GapMeasure::kRelative);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t j = 0; j < child_count(pb, t); ++j) EXPECT_EQ(st.model.objective(t, j).size(), 11u);
}

TEST(CutFromDuals, SingleChildArithmetic) {
  StageLp lp;
  lp.obj_a = Matrix::Constant(1, 1, 1.0);
  lp.obj_b = Matrix::Constant(1, 1, 2.0);
  lp.obj_c = scalar(3.0);
  lp.con_d.resize(0, 1);
  lp.con_e.resize(0, 1);
  lp.con_h.resize(0);
  lp.ctg_beta = Matrix::Constant(1, 1, 0.5);
  lp.ctg_theta = scalar(0.7);
  lp.cpl_a.resize(0, 1);
  lp.cpl_b.resize(0, 1);
  lp.cpl_b_rhs.resize(0);
  lp.lo = scalar(-1.0);
  lp.hi = scalar(1.0);
  lp.x_prev = scalar(0.0);
  LpSolution sol;
  sol.dual.alpha = scalar(1.0);
  sol.dual.delta = scalar(1.0);
  sol.dual.mu.resize(0);
  sol.dual.lambda.resize(0);
  // Stationarity 1 + 0.5 = nu_lo - nu_hi.
  sol.dual.nu = (Vector(2) << 1.5, 0.0).finished();
  ASSERT_LE(dual_stationarity_residual(sol.dual, lp).norm(), 1e-15);
  const ValueCut cut = cut_from_duals({{1.0, &sol, &lp}}, 4);
  EXPECT_DOUBLE_EQ(cut.beta[0], 2.0);
  // c + theta_cut + nu_lo * lo
  EXPECT_DOUBLE_EQ(cut.theta, 3.0 + 0.7 - 1.5);
  EXPECT_EQ(cut.birth_iter, 4);
  EXPECT_NEAR(cut(lp.x_prev), dual_objective(sol.dual, lp), 1e-15);
}

// Exact duals make the aggregated cut touch the expected child value, which
// the brute-force vertex oracle recomputes without the interior-point code.
TEST(CutFromDuals, ExactDualsAreTightAtTrialPoint) {
  const Problem pb = testing::tracking_problem(3, {0.5, 2.0});
  SolverState st(pb, false);
  CounterRng rng(3, RngStream::kWarmStart);
  warm_start(st, 2, rng);
  CounterRng paths(3, RngStream::kPathSampling);
  for (int k = 0; k < 6; ++k) {
    const IterationReport rep = forward_pass(st, sample_path(pb, paths), 1e-10, 1e-10, GapMeasure::kRelative);
    for (std::size_t t = 1; t < 3; ++t) {
      const StageRecord& s = rep.stages[t];
      double expected = 0.0;
      for (const ChildRecord& c : s.children) {
        const auto opt = testing::vertex_enumeration_optimum(c.lp);
        ASSERT_TRUE(opt.has_value());
        expected += c.prob * opt->value;
      }
      ASSERT_TRUE(s.cut.has_value());
      EXPECT_NEAR((*s.cut)(s.x_prev), expected, 1e-8 * std::max(1.0, std::abs(expected)))
          << "iteration " << k + 1 << " stage " << t;
    }
  }
}

TEST(CutFromDuals, ZeroProblemGivesZeroCut) {
  const Problem pb = testing::zero_problem(3, 2, 2);
  SolverState st(pb, false);
  CounterRng rng(1, RngStream::kWarmStart);
  warm_start(st, 1, rng);
  CounterRng paths(1, RngStream::kPathSampling);
  for (int k = 0; k < 3; ++k) {
    const IterationReport rep = forward_pass(st, sample_path(pb, paths), 1e-10, 1e-10, GapMeasure::kRelative);
    // At the first iteration only the last stage sees an exact future.
    for (std::size_t t = k == 0 ? 2 : 1; t < 3; ++t) {
      const ValueCut& cut = *rep.stages[t].cut;
      EXPECT_NEAR(cut.theta, 0.0, 1e-8);
      EXPECT_LE(cut.beta.lpNorm<Eigen::Infinity>(), 1e-8);
    }
  }
}

TEST(CutFromDuals, RejectsEmptyChildSet) {
  EXPECT_THROW(cut_from_duals({}, 1), std::invalid_argument);
}

TEST(CutSelectOldest, BundleSizeTrace) {
  const Problem pb = testing::zero_problem(2, 1, 1);
  PolyhedralModel m(pb);
  std::vector<std::size_t> sizes{m.future_cost(0).size()};
  for (int k = 1; k <= 11; ++k) {
    m.future_cost(0).add({Vector::Zero(1), -static_cast<double>(k), k});
    cut_select_oldest(m, 5, 5, k);
    sizes.push_back(m.future_cost(0).size());
    EXPECT_EQ(m.future_cost(1).size(), 1u);
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{1, 2, 3, 4, 5, 5, 5, 5, 5, 5, 6, 7}));
  // The survivors are the newest cuts.
  EXPECT_EQ(m.future_cost(0)[0].birth_iter, 5);
}

TEST(CutSelectOldest, ZeroWindowIsNoOp) {
  const Problem pb = testing::zero_problem(2, 1, 1);
  PolyhedralModel m(pb);
  for (int k = 1; k <= 8; ++k) {
    m.future_cost(0).add({Vector::Zero(1), 0.0, k});
    cut_select_oldest(m, 3, 0, k);
  }
  EXPECT_EQ(m.future_cost(0).size(), 9u);
}

TEST(CutSelectOldest, RejectsKeepBelowOne) {
  const Problem pb = testing::zero_problem(2, 1, 1);
  PolyhedralModel m(pb);
  EXPECT_THROW(cut_select_oldest(m, 0, 5, 1), std::invalid_argument);
}

TEST(WriteBundlesCsv, HeaderAndRows) {
  const Problem pb = testing::zero_problem(2, 2, 1);
  PolyhedralModel m(pb);
  m.future_cost(0).add({(Vector(2) << 0.25, -1.0).finished(), 3.5, 7});
  std::ostringstream os;
  write_bundles_csv(os, m);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "kind,t,j,birth_iter,c,a1,a2,b1,b2");
  std::getline(is, line);
  EXPECT_EQ(line, "objective,1,1,0,-1e+09,0,0,0,0");
  EXPECT_NE(os.str().find("cost_to_go,2,,7,3.5,0,0,0.25,-1\n"), std::string::npos);
}

// Linearization tightness at every child solution and feasibility of child
// solutions for the constraint model they were computed with.
TEST(ForwardPassProperty, TightnessAndModelFeasibility) {
  const Problem pb = generate_instance(3, 2, 2, 5);
  SolverState st(pb, false);
  CounterRng rng(5, RngStream::kWarmStart);
  warm_start(st, 20, rng);
  CounterRng paths(5, RngStream::kPathSampling);
  for (int k = 0; k < 20; ++k) {
    const IterationReport rep = forward_pass(st, sample_path(pb, paths), 1e-10, 1e-9, GapMeasure::kRelative);
    EXPECT_LE(rep.max_tightness_error, 1e-9);
    EXPECT_LE(rep.max_model_violation, 1e-8);
    for (const StageRecord& s : rep.stages) {
      for (const ChildRecord& c : s.children) {
        const Realization& r = pb.realization(s.t, c.j);
        const Vector& x = c.solution.x;
        const double fv = r.objective->value(x, s.x_prev);
        EXPECT_NEAR(st.model.objective(s.t, c.j).evaluate(x, s.x_prev), fv, 1e-9);
      }
    }
  }
}

}  // namespace
}  // namespace nestedcuts
