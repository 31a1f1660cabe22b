#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nestedcuts/model.hpp"

namespace nestedcuts {

/// Noise data of one realization of the max-of-quadratics family.
struct PbsimRealization {
  double prob = 1.0;
  Vector xi;
  double psi = 1e4;
  double u = 10.0;
};

/// Instance of the nondifferentiable test family
///
///   f_t = max((x_t - x_{t-1})' xi xi' (x_t - x_{t-1}) + x_t' xi + 1,
///             x_t' xi xi' x_t + x_t' e + U_t)
///   max(4 (x_t - e)'(x_t - e), x_t' xi xi' x_t + x_t' xi + 1) <= Psi_t
///
/// over the box lo <= x_t <= hi.
struct PbsimInstance {
  int T = 0;
  int n = 0;
  Vector x0;
  double lo = -100.0;
  double hi = 100.0;
  std::vector<std::vector<PbsimRealization>> stages;
  std::uint64_t seed = 0;
};

/// Random instance: xi ~ N(m_t, A_t A_t' + 0.5 I) sampled M times with equal
/// weights, m_t entries +-1, A_t entries uniform in [-0.5, 0.5], U_t = +-10,
/// Psi_t uniform in [1e4, 1e5]. The first stage has a single realization and
/// x0 = 0.
PbsimInstance generate_pbsim(int T, int n, int M, std::uint64_t seed);

Problem build_problem(const PbsimInstance& inst);

inline Problem generate_instance(int T, int n, int M, std::uint64_t seed) {
  return build_problem(generate_pbsim(T, n, M, seed));
}

/// Sizes of the deterministic equivalent with each max replaced by two
/// quadratic constraints.
struct DetEquivCounts {
  std::uint64_t variables;
  std::uint64_t linear_constraints;
  std::uint64_t quadratic_constraints;
};

/// (n+2)(1+M^(T-1)), (2n+1)(1+M^(T-1)), 4(1+M^(T-1)); throws
/// std::overflow_error when a count does not fit in 64 bits.
DetEquivCounts det_equiv_counts(std::uint64_t T, std::uint64_t n, std::uint64_t M);

void write_instance_json(std::ostream& os, const PbsimInstance& inst);
std::string instance_to_json(const PbsimInstance& inst);
/// Throws std::runtime_error on schema violations.
PbsimInstance read_instance_json(std::istream& is);
PbsimInstance load_instance(const std::string& path);

}  // namespace nestedcuts
