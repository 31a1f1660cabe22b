#include "nestedcuts/model.hpp"

#include <cmath>
#include <stdexcept>

namespace nestedcuts {

namespace {

// Extended-precision dot product; cut constants are differences of large
// terms and tightness at the linearization point is checked to 1e-9.
long double dot_ext(const Vector& u, const Vector& v) {
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    acc += static_cast<long double>(u[i]) * static_cast<long double>(v[i]);
  }
  return acc;
}

void require_dim(const Vector& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

double AffineCut::operator()(const Vector& x, const Vector& x_prev) const {
  return static_cast<double>(dot_ext(a, x) + dot_ext(b, x_prev) + static_cast<long double>(c));
}

AffineOracle::AffineOracle(Vector a, Vector b, double c)
    : a_(std::move(a)), b_(std::move(b)), c_(c) {
  require_dim(b_, a_.size(), "AffineOracle");
}

double AffineOracle::value(const Vector& x, const Vector& x_prev) const {
  return static_cast<double>(dot_ext(a_, x) + dot_ext(b_, x_prev) + c_);
}

OracleValue AffineOracle::evaluate(const Vector& x, const Vector& x_prev) const {
  return {value(x, x_prev), a_, b_};
}

ProjectedSquareOracle::ProjectedSquareOracle(Vector xi, double prev_weight, Vector linear,
                                             double constant)
    : xi_(std::move(xi)), prev_weight_(prev_weight), linear_(std::move(linear)),
      constant_(constant) {
  require_dim(linear_, xi_.size(), "ProjectedSquareOracle");
}

double ProjectedSquareOracle::value(const Vector& x, const Vector& x_prev) const {
  long double s = dot_ext(xi_, x);
  if (prev_weight_ != 0.0) s += prev_weight_ * dot_ext(xi_, x_prev);
  return static_cast<double>(s * s + dot_ext(linear_, x) + constant_);
}

OracleValue ProjectedSquareOracle::evaluate(const Vector& x, const Vector& x_prev) const {
  long double s = dot_ext(xi_, x);
  if (prev_weight_ != 0.0) s += prev_weight_ * dot_ext(xi_, x_prev);
  OracleValue out;
  out.value = static_cast<double>(s * s + dot_ext(linear_, x) + constant_);
  const double two_s = static_cast<double>(2.0L * s);
  out.grad_x = two_s * xi_ + linear_;
  out.grad_prev = (two_s * prev_weight_) * xi_;
  return out;
}

SquaredDistanceOracle::SquaredDistanceOracle(double scale, Vector center, double constant)
    : scale_(scale), center_(std::move(center)), constant_(constant) {
  if (!(scale_ >= 0.0)) throw std::invalid_argument("SquaredDistanceOracle: negative scale");
}

double SquaredDistanceOracle::value(const Vector& x, const Vector&) const {
  const Vector d = x - center_;
  return static_cast<double>(scale_ * dot_ext(d, d) + constant_);
}

OracleValue SquaredDistanceOracle::evaluate(const Vector& x, const Vector& x_prev) const {
  const Vector d = x - center_;
  OracleValue out;
  out.value = static_cast<double>(scale_ * dot_ext(d, d) + constant_);
  out.grad_x = (2.0 * scale_) * d;
  out.grad_prev = Vector::Zero(x_prev.size());
  return out;
}

MaxOracle::MaxOracle(std::vector<OraclePtr> branches) : branches_(std::move(branches)) {
  if (branches_.empty()) throw std::invalid_argument("MaxOracle: no branches");
  for (const auto& br : branches_) {
    if (!br || br->dim() != branches_.front()->dim()) {
      throw std::invalid_argument("MaxOracle: inconsistent branches");
    }
  }
}

std::size_t MaxOracle::active_branch(const Vector& x, const Vector& x_prev) const {
  std::size_t best = 0;
  double best_value = branches_[0]->value(x, x_prev);
  for (std::size_t i = 1; i < branches_.size(); ++i) {
    const double v = branches_[i]->value(x, x_prev);
    if (v > best_value) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

double MaxOracle::value(const Vector& x, const Vector& x_prev) const {
  double best = branches_[0]->value(x, x_prev);
  for (std::size_t i = 1; i < branches_.size(); ++i) {
    best = std::max(best, branches_[i]->value(x, x_prev));
  }
  return best;
}

OracleValue MaxOracle::evaluate(const Vector& x, const Vector& x_prev) const {
  return branches_[active_branch(x, x_prev)]->evaluate(x, x_prev);
}

FunctionOracle::FunctionOracle(std::size_t dim, EvalFn eval) : dim_(dim), eval_(std::move(eval)) {}

double FunctionOracle::value(const Vector& x, const Vector& x_prev) const {
  return eval_(x, x_prev).value;
}

OracleValue FunctionOracle::evaluate(const Vector& x, const Vector& x_prev) const {
  return eval_(x, x_prev);
}

AffineCut oracle_linearize(const ConvexOracle& oracle, const Vector& x, const Vector& x_prev,
                           int birth_iter) {
  OracleValue ov = oracle.evaluate(x, x_prev);
  if (!std::isfinite(ov.value)) throw std::domain_error("oracle_linearize: non-finite value");
  AffineCut cut;
  cut.c = static_cast<double>(static_cast<long double>(ov.value) - dot_ext(ov.grad_x, x) -
                              dot_ext(ov.grad_prev, x_prev));
  cut.a = std::move(ov.grad_x);
  cut.b = std::move(ov.grad_prev);
  cut.birth_iter = birth_iter;
  return cut;
}

bool StateSet::contains(const Vector& x, double tol) const {
  return ((x - lo).array() >= -tol).all() && ((hi - x).array() >= -tol).all();
}

Vector StateSet::clip(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

Vector StateSet::rhs() const {
  Vector r(2 * lo.size());
  r << lo, -hi;
  return r;
}

std::vector<double> StageRandomness::probabilities() const {
  std::vector<double> p;
  p.reserve(realizations.size());
  for (const auto& r : realizations) p.push_back(r.prob);
  return p;
}

Problem::Problem(Vector x0, std::vector<StageRandomness> stages, std::vector<StateSet> state_sets)
    : x0_(std::move(x0)), stages_(std::move(stages)), state_sets_(std::move(state_sets)) {
  const std::size_t n = state_dim();
  if (stages_.empty()) throw std::invalid_argument("Problem: no stages");
  if (state_sets_.size() != stages_.size()) {
    throw std::invalid_argument("Problem: one state set per stage required");
  }
  if (stages_.front().realizations.size() != 1) {
    throw std::invalid_argument("Problem: first stage must be deterministic");
  }
  for (std::size_t t = 0; t < stages_.size(); ++t) {
    const auto& box = state_sets_[t];
    if (box.dim() != n || static_cast<std::size_t>(box.hi.size()) != n) {
      throw std::invalid_argument("Problem: state set dimension mismatch");
    }
    if (((box.hi - box.lo).array() < 0.0).any()) {
      throw std::invalid_argument("Problem: empty state set (lo > hi)");
    }
    const auto& reals = stages_[t].realizations;
    if (reals.empty()) throw std::invalid_argument("Problem: stage without realizations");
    double total = 0.0;
    for (const auto& r : reals) {
      if (!(r.prob >= 0.0 && r.prob <= 1.0)) {
        throw std::invalid_argument("Problem: probability outside [0, 1]");
      }
      total += r.prob;
      if (!r.objective || r.objective->dim() != n) {
        throw std::invalid_argument("Problem: missing or mis-sized objective oracle");
      }
      for (const auto& g : r.constraints) {
        if (!g || g->dim() != n) throw std::invalid_argument("Problem: mis-sized constraint oracle");
      }
      const auto q = r.A.rows();
      if (q > 0 && (static_cast<std::size_t>(r.A.cols()) != n || r.B.rows() != q ||
                    static_cast<std::size_t>(r.B.cols()) != n || r.b.size() != q)) {
        throw std::invalid_argument("Problem: coupling block dimension mismatch");
      }
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("Problem: stage probabilities do not sum to one");
    }
  }
}

bool Problem::deterministic() const {
  for (const auto& s : stages_) {
    if (s.realizations.size() != 1) return false;
  }
  return true;
}

std::vector<std::size_t> sample_path(const Problem& problem, CounterRng& rng) {
  std::vector<std::size_t> path(problem.stage_count(), 0);
  for (std::size_t t = 1; t < problem.stage_count(); ++t) {
    const auto& reals = problem.stage(t).realizations;
    if (reals.size() == 1) continue;
    const auto probs = problem.stage(t).probabilities();
    path[t] = rng.discrete(probs);
  }
  return path;
}

std::size_t child_count(const Problem& problem, std::size_t t) {
  if (t >= problem.stage_count()) throw std::out_of_range("child_count: stage out of range");
  return problem.stage(t).realizations.size();
}

}  // namespace nestedcuts
