#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nestedcuts/cuts.hpp"
#include "nestedcuts/model.hpp"
#include "nestedcuts/rng.hpp"
#include "nestedcuts/stage_lp.hpp"

namespace nestedcuts {

/// Piecewise-constant subproblem tolerance by iteration: breakpoint i covers
/// iterations up to and including last_iter, later iterations get
/// terminal_eps.
class EpsSchedule {
 public:
  struct Breakpoint {
    int last_iter;
    double eps;
  };

  EpsSchedule() = default;
  EpsSchedule(std::vector<Breakpoint> breakpoints, double terminal_eps);

  static EpsSchedule constant(double eps) { return EpsSchedule({}, eps); }
  /// 10, 5, 3, 1, 0.5, 0.1 up to iterations 10, 20, 40, 140, 240, 350, then
  /// 1e-6. `compress` divides every breakpoint.
  static EpsSchedule table2(int compress = 1);
  /// "builtin:table2", "builtin:table2/10", "const:<eps>" or a JSON file
  /// {"breakpoints":[{"last_iter":10,"eps":10},...],"terminal":1e-6}.
  static EpsSchedule parse(const std::string& spec);
  static EpsSchedule from_json(std::istream& is);

  double at(int iter) const;
  bool nonincreasing() const;
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }
  double terminal() const { return terminal_; }

 private:
  std::vector<Breakpoint> breakpoints_;
  double terminal_ = 1e-10;
};

enum class Algorithm { kDCuP, kStoDCuP, kIStoDCuP, kIStoDCuPCS };
const char* to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

/// Everything one child subproblem solve produced.
struct ChildRecord {
  std::size_t j = 0;
  double prob = 1.0;
  StageLp lp;
  LpSolution solution;
};

struct StageRecord {
  std::size_t t = 0;
  Vector x_prev;
  double eps = 0.0;
  std::vector<ChildRecord> children;
  /// Cut on the expected cost of this stage as a function of x_prev; absent
  /// at the first stage.
  std::optional<ValueCut> cut;
};

struct IterationReport {
  int iter = 0;
  std::vector<std::size_t> path;
  std::vector<StageRecord> stages;
  /// Certified value of the exact first-stage LP.
  double lower_bound = 0.0;
  /// True cost of the sampled trajectory.
  double forward_cost = 0.0;
  /// max(g_ti, 0) along the sampled trajectory.
  double max_violation = 0.0;
  /// max |model - oracle| at the new linearization points.
  double max_tightness_error = 0.0;
  /// Largest constraint-model value at a child solution (model before update).
  double max_model_violation = 0.0;
  int lp_solves = 0;
  long lp_iterations = 0;
};

struct BoundRecord {
  int iter = 0;
  double lb = 0.0;
  double ub = 0.0;  // NaN before the upper bound is defined
  double ub_mean = 0.0;
  double ub_std = 0.0;
  double eps = 0.0;
  std::size_t cuts_q_total = 0;
  long lp_solves = 0;
  long lp_iterations = 0;
  double max_violation = 0.0;
  double wall_time_s = 0.0;
};

struct RunConfig {
  Algorithm algo = Algorithm::kStoDCuP;
  /// Used by the inexact variants; the exact variant solves at exact_eps.
  EpsSchedule schedule = EpsSchedule::table2();
  double exact_eps = 1e-10;
  double first_stage_eps = 1e-9;
  GapMeasure gap_measure = GapMeasure::kRelative;
  double gap_threshold = 0.1;
  int max_iters = 1000;
  int warm_start_count = 20;
  int ub_window = 200;
  int ub_start = 200;
  double alpha = 0.05;
  int cs_keep = 350;
  int cs_window = 350;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Move a trajectory point that violates a true constraint to the most
  /// interior near-optimal point of its stage LP before linearizing there.
  bool recenter = true;
  /// Called after every iteration with the full per-stage record.
  std::function<void(const IterationReport&, const PolyhedralModel&)> observer;
  /// Called with each trace record as soon as it is complete.
  std::function<void(const BoundRecord&)> on_record;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct SolverState {
  explicit SolverState(const Problem& problem, bool seed_loose_minorants = true)
      : problem(&problem), model(problem, seed_loose_minorants) {}

  const Problem* problem;
  PolyhedralModel model;
  int iteration = 0;
  std::vector<double> forward_costs;
  std::vector<double> lower_bounds;
  long lp_solves = 0;
  long lp_iterations = 0;
};

/// Adds `count` linearizations of every objective and constraint oracle at
/// points drawn uniformly from the stage box (previous state from the
/// previous box, or x0 at the first stage).
void warm_start(SolverState& state, int count, CounterRng& rng);

/// One forward pass along `path` at iteration state.iteration + 1, solving
/// every child of each path node and updating all models. With `recenter`
/// the sampled child's point goes through recenter_constraints first when it
/// violates a true constraint.
IterationReport forward_pass(SolverState& state, const std::vector<std::size_t>& path, double eps,
                             double first_stage_eps, GapMeasure measure, unsigned threads = 1,
                             bool recenter = true);

/// Most recent first-stage value; throws std::logic_error before any iteration.
double lower_bound(const SolverState& state);

struct UpperBound {
  double mean;
  double std;
  double ub;
  bool low_confidence;  // single sample: std undefined, ub = mean
};

/// One-sided normal confidence bound mean + z_{1-alpha} std / sqrt(N) with the
/// sample standard deviation.
UpperBound upper_bound(const std::vector<double>& costs, double alpha);

/// (ub - lb) / |ub|, with max(1, |ub|) in the denominator when |ub| < 1.
double stopping_gap(double lb, double ub);

struct SimulatedCost {
  double cost;
  double max_violation;
};

/// Rolls the current policy forward on sampled scenarios with exact solves.
std::vector<SimulatedCost> simulate_policy(const Problem& problem, const PolyhedralModel& model,
                                           int n_scenarios, CounterRng& rng);

struct RunResult {
  std::vector<BoundRecord> trace;
  bool gap_met = false;
  double final_gap = 0.0;
  double elapsed_s = 0.0;
};

/// Runs the configured variant; DCuP is dispatched to dcup_run. The returned
/// state carries the final models.
RunResult run(const Problem& problem, const RunConfig& config, SolverState* state_out = nullptr);

/// iter,lb,ub,ub_mean,ub_std,eps,cuts_q_total,lp_solves,wall_time_s,lp_iterations,max_violation
void write_trace_header(std::ostream& os);
void write_trace_row(std::ostream& os, const BoundRecord& r, bool with_time);

}  // namespace nestedcuts
