#include "nestedcuts/instances.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nestedcuts/rng.hpp"

namespace nestedcuts {

namespace {

constexpr int kMaxRedraws = 100;
constexpr int kActivitySamples = 1000;

OraclePtr make_objective(const Vector& xi, double u) {
  const Eigen::Index n = xi.size();
  return std::make_shared<MaxOracle>(std::vector<OraclePtr>{
      std::make_shared<ProjectedSquareOracle>(xi, -1.0, xi, 1.0),
      std::make_shared<ProjectedSquareOracle>(xi, 0.0, Vector::Ones(n), u)});
}

OraclePtr make_constraint(const Vector& xi, double psi) {
  const Eigen::Index n = xi.size();
  return std::make_shared<MaxOracle>(std::vector<OraclePtr>{
      std::make_shared<SquaredDistanceOracle>(4.0, Vector::Ones(n), -psi),
      std::make_shared<ProjectedSquareOracle>(xi, 0.0, xi, 1.0 - psi)});
}

// Both branches of both max functions must be strictly active somewhere on
// the box, otherwise the realization is effectively smooth.
bool both_branches_active(const Vector& xi, double psi, double u, double lo, double hi,
                          CounterRng& rng) {
  const Eigen::Index n = xi.size();
  const auto f = make_objective(xi, u);
  const auto g = make_constraint(xi, psi);
  const auto& fm = static_cast<const MaxOracle&>(*f);
  const auto& gm = static_cast<const MaxOracle&>(*g);
  bool seen[2][2] = {{false, false}, {false, false}};
  Vector x(n), xp(n);
  for (int s = 0; s < kActivitySamples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform(lo, hi);
    for (Eigen::Index i = 0; i < n; ++i) xp[i] = rng.uniform(lo, hi);
    seen[0][fm.active_branch(x, xp)] = true;
    seen[1][gm.active_branch(x, xp)] = true;
    if (seen[0][0] && seen[0][1] && seen[1][0] && seen[1][1]) return true;
  }
  return false;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("det_equiv_counts: overflow");
  return r;
}

}  // namespace

PbsimInstance generate_pbsim(int T, int n, int M, std::uint64_t seed) {
  if (T < 1 || n < 1 || M < 1) throw std::invalid_argument("generate_pbsim: T, n, M must be >= 1");
  CounterRng rng(seed, RngStream::kInstance);
  PbsimInstance inst;
  inst.T = T;
  inst.n = n;
  inst.seed = seed;
  inst.x0 = Vector::Zero(n);
  const double half_sqrt = std::sqrt(0.5);

  for (int t = 0; t < T; ++t) {
    Vector mean(n);
    for (int i = 0; i < n; ++i) mean[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Matrix A(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) A(r, c) = rng.uniform(-0.5, 0.5);

    const int count = t == 0 ? 1 : M;
    std::vector<PbsimRealization> reals;
    for (int j = 0; j < count; ++j) {
      PbsimRealization r;
      r.prob = 1.0 / count;
      r.u = rng.uniform() < 0.5 ? 10.0 : -10.0;
      r.psi = rng.uniform(1e4, 1e5);
      for (int attempt = 0;; ++attempt) {
        // A z1 + sqrt(0.5) z2 has covariance A A' + 0.5 I.
        Vector z1(n), z2(n);
        for (int i = 0; i < n; ++i) z1[i] = rng.normal();
        for (int i = 0; i < n; ++i) z2[i] = rng.normal();
        r.xi = mean + A * z1 + half_sqrt * z2;
        if (both_branches_active(r.xi, r.psi, r.u, inst.lo, inst.hi, rng)) break;
        if (attempt + 1 >= kMaxRedraws)
          throw std::runtime_error("generate_pbsim: could not draw a nonsmooth realization");
      }
      reals.push_back(std::move(r));
    }
    inst.stages.push_back(std::move(reals));
  }
  return inst;
}

Problem build_problem(const PbsimInstance& inst) {
  const Eigen::Index n = inst.n;
  if (inst.x0.size() != n) throw std::invalid_argument("build_problem: x0 dimension");
  if (static_cast<int>(inst.stages.size()) != inst.T)
    throw std::invalid_argument("build_problem: stage count");
  std::vector<StageRandomness> stages;
  std::vector<StateSet> sets;
  for (const auto& st : inst.stages) {
    StageRandomness sr;
    for (const auto& r : st) {
      if (r.xi.size() != n) throw std::invalid_argument("build_problem: xi dimension");
      Realization real;
      real.prob = r.prob;
      real.xi = r.xi;
      real.A.resize(0, n);
      real.B.resize(0, n);
      real.b.resize(0);
      real.objective = make_objective(r.xi, r.u);
      real.constraints.push_back(make_constraint(r.xi, r.psi));
      sr.realizations.push_back(std::move(real));
    }
    stages.push_back(std::move(sr));
    sets.push_back(StateSet{Vector::Constant(n, inst.lo), Vector::Constant(n, inst.hi)});
  }
  return Problem(inst.x0, std::move(stages), std::move(sets));
}

DetEquivCounts det_equiv_counts(std::uint64_t T, std::uint64_t n, std::uint64_t M) {
  if (T < 1 || n < 1 || M < 1) throw std::invalid_argument("det_equiv_counts: parameters must be >= 1");
  std::uint64_t leaves = 1;
  for (std::uint64_t t = 1; t < T; ++t) leaves = checked_mul(leaves, M);
  if (leaves == std::numeric_limits<std::uint64_t>::max())
    throw std::overflow_error("det_equiv_counts: overflow");
  const std::uint64_t nodes = leaves + 1;
  if (n > std::numeric_limits<std::uint64_t>::max() / 2 - 1)
    throw std::overflow_error("det_equiv_counts: overflow");
  return {checked_mul(n + 2, nodes), checked_mul(2 * n + 1, nodes), checked_mul(4, nodes)};
}

}  // namespace nestedcuts
