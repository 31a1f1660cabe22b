#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nestedcuts/instances.hpp"
#include "nestedcuts/reference.hpp"
#include "support/barrier_reference.hpp"
#include "support/small_problems.hpp"

namespace nestedcuts {
namespace {

struct Row {
  std::uint64_t T, n, M;
  std::uint64_t vars, lin, quad;
};

// Exact counts; the last three rows are printed rounded in the source table,
// so their printed form is checked separately below.
TEST(DetEquivCounts, SixInstanceRows) {
  const Row rows[] = {
      {3, 10, 2, 60, 105, 20},
      {3, 10, 10, 1212, 2121, 404},
      {5, 10, 10, 120012, 210021, 40004},
      {5, 10, 20, 1920012, 3360021, 640004},
      {10, 200, 10, 202000000202ULL, 401000000401ULL, 4000000004ULL},
      {10, 200, 20, 103424000000202ULL, 205312000000401ULL, 2048000000004ULL},
  };
  for (const Row& r : rows) {
    const DetEquivCounts c = det_equiv_counts(r.T, r.n, r.M);
    EXPECT_EQ(c.variables, r.vars) << r.T << "," << r.n << "," << r.M;
    EXPECT_EQ(c.linear_constraints, r.lin);
    EXPECT_EQ(c.quadratic_constraints, r.quad);
  }
}

TEST(DetEquivCounts, RoundedRowsMatchPrintedValues) {
  auto sig = [](std::uint64_t v, int digits) {
    std::ostringstream os;
    os.precision(digits - 1);
    os << std::scientific << static_cast<double>(v);
    return os.str();
  };
  const DetEquivCounts a = det_equiv_counts(5, 10, 20);
  EXPECT_EQ(sig(a.variables, 3), "1.92e+06");
  EXPECT_EQ(sig(a.linear_constraints, 3), "3.36e+06");
  EXPECT_EQ(sig(a.quadratic_constraints, 2), "6.4e+05");
  const DetEquivCounts b = det_equiv_counts(10, 200, 10);
  EXPECT_EQ(sig(b.variables, 3), "2.02e+11");
  EXPECT_EQ(sig(b.linear_constraints, 3), "4.01e+11");
  EXPECT_EQ(sig(b.quadratic_constraints, 1), "4e+09");
  const DetEquivCounts c = det_equiv_counts(10, 200, 20);
  EXPECT_EQ(sig(c.variables, 5), "1.0342e+14");
  EXPECT_EQ(sig(c.linear_constraints, 5), "2.0531e+14");
  EXPECT_EQ(sig(c.quadratic_constraints, 5), "2.0480e+12");
}

TEST(DetEquivCounts, SingleStageAndOverflow) {
  const DetEquivCounts c = det_equiv_counts(1, 7, 30);
  EXPECT_EQ(c.variables, 2u * 9u);
  EXPECT_EQ(c.linear_constraints, 2u * 15u);
  EXPECT_EQ(c.quadratic_constraints, 8u);
  EXPECT_THROW(det_equiv_counts(65, 10, 2), std::overflow_error);
  EXPECT_THROW(det_equiv_counts(30, 10, 1000), std::overflow_error);
  EXPECT_THROW(det_equiv_counts(0, 10, 2), std::invalid_argument);
}

TEST(GeneratePbsim, ShapeAndSupports) {
  const PbsimInstance inst = generate_pbsim(4, 5, 6, 11);
  EXPECT_EQ(inst.T, 4);
  EXPECT_EQ(inst.n, 5);
  EXPECT_EQ(inst.x0, Vector::Zero(5));
  EXPECT_EQ(inst.lo, -100.0);
  EXPECT_EQ(inst.hi, 100.0);
  ASSERT_EQ(inst.stages.size(), 4u);
  EXPECT_EQ(inst.stages[0].size(), 1u);
  EXPECT_EQ(inst.stages[0][0].prob, 1.0);
  for (std::size_t t = 1; t < 4; ++t) {
    ASSERT_EQ(inst.stages[t].size(), 6u);
    for (const auto& r : inst.stages[t]) {
      EXPECT_DOUBLE_EQ(r.prob, 1.0 / 6.0);
      EXPECT_EQ(r.xi.size(), 5);
    }
  }
  bool plus = false, minus = false;
  for (int seed = 1; seed <= 20; ++seed) {
    for (const auto& st : generate_pbsim(3, 2, 5, static_cast<std::uint64_t>(seed)).stages) {
      for (const auto& r : st) {
        EXPECT_GE(r.psi, 1e4);
        EXPECT_LE(r.psi, 1e5);
        EXPECT_TRUE(r.u == 10.0 || r.u == -10.0);
        plus = plus || r.u > 0;
        minus = minus || r.u < 0;
      }
    }
  }
  EXPECT_TRUE(plus && minus);
  EXPECT_THROW(generate_pbsim(0, 2, 2, 1), std::invalid_argument);
}

TEST(GeneratePbsim, SameSeedSameSerialization) {
  EXPECT_EQ(instance_to_json(generate_pbsim(3, 10, 2, 1)), instance_to_json(generate_pbsim(3, 10, 2, 1)));
  EXPECT_NE(instance_to_json(generate_pbsim(3, 10, 2, 1)), instance_to_json(generate_pbsim(3, 10, 2, 2)));
}

TEST(InstanceJson, RoundTripIsBitExact) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const PbsimInstance a = generate_pbsim(1 + static_cast<int>(seed % 4), 1 + static_cast<int>(seed % 6),
                                           1 + static_cast<int>(seed % 3), seed);
    const std::string text = instance_to_json(a);
    std::istringstream is(text);
    const PbsimInstance b = read_instance_json(is);
    EXPECT_EQ(instance_to_json(b), text);
    ASSERT_EQ(b.stages.size(), a.stages.size());
    EXPECT_EQ(b.seed, a.seed);
    for (std::size_t t = 0; t < a.stages.size(); ++t) {
      ASSERT_EQ(b.stages[t].size(), a.stages[t].size());
      for (std::size_t j = 0; j < a.stages[t].size(); ++j) {
        EXPECT_EQ(b.stages[t][j].xi, a.stages[t][j].xi);
        EXPECT_EQ(b.stages[t][j].psi, a.stages[t][j].psi);
        EXPECT_EQ(b.stages[t][j].prob, a.stages[t][j].prob);
      }
    }
  }
}

TEST(InstanceJson, SchemaErrors) {
  const std::string good = instance_to_json(generate_pbsim(2, 2, 2, 1));
  auto reject = [](const std::string& text) {
    std::istringstream is(text);
    EXPECT_THROW(read_instance_json(is), std::runtime_error) << text.substr(0, 60);
  };
  auto edit = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto pos = s.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return s.replace(pos, from.size(), to);
  };
  reject("{not json");
  reject("{}");
  reject(edit("\"pbsim-v1\"", "\"other\""));
  reject(edit("\"T\": 2", "\"T\": 3"));
  reject(edit("\"n\": 2", "\"n\": 0"));
  reject(edit("\"x0\": [", "\"x0\": [1.0,"));
  reject(edit("\"psi\"", "\"psy\""));
  std::istringstream ok(good);
  EXPECT_NO_THROW(read_instance_json(ok));
  EXPECT_THROW(load_instance("/nonexistent/instance.json"), std::runtime_error);
}

TEST(BuildProblem, ProbabilitiesAndBoxes) {
  const Problem pb = generate_instance(3, 4, 3, 2);
  EXPECT_EQ(pb.stage_count(), 3u);
  EXPECT_EQ(pb.state_dim(), 4u);
  EXPECT_EQ(child_count(pb, 2), 3u);
  EXPECT_EQ(pb.state_set(1).lo, Vector::Constant(4, -100.0));
  EXPECT_EQ(pb.realization(1, 0).constraints.size(), 1u);
  EXPECT_EQ(pb.realization(1, 0).coupling_rows(), 0u);
}

// Objective of one realization evaluated against the closed form.
TEST(BuildProblem, OraclesMatchClosedForm) {
  const PbsimInstance inst = generate_pbsim(2, 3, 2, 4);
  const Problem pb = build_problem(inst);
  const PbsimRealization& r = inst.stages[1][1];
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> U(-100, 100);
  const Eigen::Vector3d e = Eigen::Vector3d::Ones();
  for (int k = 0; k < 50; ++k) {
    const Vector x = Vector::NullaryExpr(3, [&] { return U(gen); });
    const Vector xp = Vector::NullaryExpr(3, [&] { return U(gen); });
    const Matrix Q = r.xi * r.xi.transpose();
    const double f = std::max((x - xp).dot(Q * (x - xp)) + x.dot(r.xi) + 1.0, x.dot(Q * x) + x.dot(e) + r.u);
    const double g = std::max(4.0 * (x - e).squaredNorm(), x.dot(Q * x) + x.dot(r.xi) + 1.0) - r.psi;
    EXPECT_NEAR(pb.realization(1, 1).objective->value(x, xp), f, 1e-9 * std::max(1.0, std::abs(f)));
    EXPECT_NEAR(pb.realization(1, 1).constraints[0]->value(x, xp), g, 1e-9 * std::max(1.0, std::abs(g)));
  }
}

TEST(BuildProblem, OriginIsAlwaysFeasible) {
  const Problem pb = generate_instance(3, 10, 4, 3);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(-100, 100);
  const Vector zero = Vector::Zero(10);
  for (int k = 0; k < 100; ++k) {
    const Vector xp = Vector::NullaryExpr(10, [&] { return U(gen); });
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t j = 0; j < child_count(pb, t); ++j)
        EXPECT_LT(pb.realization(t, j).constraints[0]->value(zero, xp), 0.0);
  }
}

TEST(BuildProblem, EveryBranchIsActiveSomewhere) {
  const Problem pb = generate_instance(3, 4, 3, 8);
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> U(-100, 100);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t j = 0; j < child_count(pb, t); ++j) {
      const Realization& r = pb.realization(t, j);
      const auto& f = dynamic_cast<const MaxOracle&>(*r.objective);
      const auto& g = dynamic_cast<const MaxOracle&>(*r.constraints[0]);
      bool seen[2][2] = {};
      for (int k = 0; k < 1000; ++k) {
        const Vector x = Vector::NullaryExpr(4, [&] { return U(gen); });
        const Vector xp = Vector::NullaryExpr(4, [&] { return U(gen); });
        seen[0][f.active_branch(x, xp)] = true;
        seen[1][g.active_branch(x, xp)] = true;
      }
      EXPECT_TRUE(seen[0][0] && seen[0][1] && seen[1][0] && seen[1][1]) << t << "," << j;
    }
  }
}

TEST(KelleyReference, AffineProblemsMatchClosedForm) {
  const Vector a = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const Vector b = (Vector(3) << 0.3, 0.0, -1.0).finished();
  // T = 1 from x0 = 0: c - |a|_1.
  EXPECT_NEAR(kelley_reference_solve(testing::affine_problem(1, a, b, 2.0)).value, 2.0 - 3.5, 1e-9);
  // Without coupling to the previous state each stage is independent.
  EXPECT_NEAR(kelley_reference_solve(testing::affine_problem(3, a, Vector::Zero(3), 2.0)).value, 3 * (2.0 - 3.5),
              1e-9);
}

// Two stages, weights {0.5, 4} on the tracking term: nested grid search over
// x1 and each x2 versus the cutting-plane reference.
TEST(KelleyReference, AgreesWithGridSearch) {
  const std::vector<double> w = {0.5, 4.0};
  const Problem pb = testing::tracking_problem(2, w);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) {
    const double x1 = -1.0 + 1e-3 * i;
    double total = x1 * x1 + (x1 - 1.0) * (x1 - 1.0);
    for (double wj : w) {
      double inner = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= 2000; ++k) {
        const double x2 = -1.0 + 1e-3 * k;
        inner = std::min(inner, wj * (x2 - x1) * (x2 - x1) + x2 * x2);
      }
      total += 0.5 * inner;
    }
    best = std::min(best, total);
  }
  const ReferenceResult ref = kelley_reference_solve(pb);
  EXPECT_NEAR(ref.value, best, 1e-2);
  EXPECT_LE(ref.value, best + 1e-9);
}

// min_y w (y - x)^2 + y^2 = w x^2 / (w + 1).
TEST(KelleyReference, LastStageCostToGoClosedForm) {
  const Problem pb = testing::tracking_problem(2, {0.5, 4.0});
  ReferenceEvaluator ev(pb);
  for (double x : {-1.0, -0.3, 0.0, 0.7}) {
    const double expected = 0.5 * (0.5 / 1.5 + 4.0 / 5.0) * x * x;
    EXPECT_NEAR(ev.cost_to_go(1, Vector::Constant(1, x)), expected, 1e-6);
  }
}

TEST(KelleyReference, GeneratedInstanceConvergesMonotonically) {
  const Problem pb = generate_instance(3, 2, 2, 1);
  const ReferenceOptions opt;
  const ReferenceResult r = kelley_reference_solve(pb, opt);
  ASSERT_FALSE(r.history.empty());
  for (std::size_t i = 1; i < r.history.size(); ++i)
    EXPECT_GE(r.history[i], r.history[i - 1] - 1e-9 * std::max(1.0, std::abs(r.history[i])));
  EXPECT_LE(r.cost_at_solution - r.value, opt.tol * std::max(1.0, std::abs(r.value)) + 1e-12);
  EXPECT_LE(r.max_violation, opt.feas_tol);
}

TEST(KelleyReference, NodeCountAndTreeLimit) {
  const Problem small = generate_instance(3, 2, 2, 1);
  ReferenceEvaluator ev(small);
  EXPECT_EQ(ev.node_count(0), 7u);
  EXPECT_EQ(ev.node_count(1), 6u);
  const Problem big = generate_instance(5, 2, 20, 1);
  EXPECT_THROW(kelley_reference_solve(big), TreeTooLarge);
}

// The barrier solve of the extensive form brackets the Kelley value: Kelley
// returns a lower bound within its relative tolerance of the optimum.
TEST(BarrierReference, BracketsKelley) {
  const Problem pb = generate_instance(3, 2, 2, 1);
  const testing::BarrierReference bar(pb);
  ReferenceEvaluator ev(pb);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(-100, 100);
  for (int i = 0; i < 5; ++i) {
    const Vector x = i == 0 ? pb.x0() : Vector::NullaryExpr(2, [&] { return U(gen); });
    const std::size_t t = i == 0 ? 0 : 1;
    const testing::BarrierSolution b = bar.solve(t, x);
    const double k = ev.solve_from(t, x).value;
    EXPECT_LE(b.lower, b.primal);
    EXPECT_LE(b.primal - b.lower, 1e-10 * std::max(1.0, std::abs(b.primal)));
    EXPECT_LE(k, b.primal + 1e-9 * std::max(1.0, std::abs(k)));
    EXPECT_NEAR(k, b.primal, 1e-7 * std::max(1.0, std::abs(k)) + 1e-9);
  }
}

TEST(BarrierReference, RejectsOpaqueOracles) {
  const Problem pb = testing::tracking_problem(2, {1.0});
  EXPECT_THROW(testing::BarrierReference(pb).solve(0, pb.x0()), std::invalid_argument);
}

}  // namespace
}  // namespace nestedcuts
