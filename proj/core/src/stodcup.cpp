#include "nestedcuts/stodcup.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "json.hpp"
#include "nestedcuts/dcup.hpp"

namespace nestedcuts {

EpsSchedule::EpsSchedule(std::vector<Breakpoint> breakpoints, double terminal_eps)
    : breakpoints_(std::move(breakpoints)), terminal_(terminal_eps) {
  int prev = 0;
  for (const auto& b : breakpoints_) {
    if (b.last_iter <= prev) throw std::invalid_argument("EpsSchedule: breakpoints must increase");
    if (!(b.eps >= 1e-10)) throw std::invalid_argument("EpsSchedule: eps must be >= 1e-10");
    prev = b.last_iter;
  }
  if (!(terminal_ >= 1e-10)) throw std::invalid_argument("EpsSchedule: eps must be >= 1e-10");
}

EpsSchedule EpsSchedule::table2(int compress) {
  if (compress < 1) throw std::invalid_argument("EpsSchedule::table2: compress must be >= 1");
  const std::vector<Breakpoint> full = {{10, 10.0}, {20, 5.0},   {40, 3.0},
                                        {140, 1.0}, {240, 0.5}, {350, 0.1}};
  std::vector<Breakpoint> out;
  for (const auto& b : full) out.push_back({b.last_iter / compress, b.eps});
  return EpsSchedule(std::move(out), 1e-6);
}

EpsSchedule EpsSchedule::from_json(std::istream& is) {
  const auto doc = nlohmann::json::parse(is);
  std::vector<Breakpoint> bps;
  for (const auto& b : doc.at("breakpoints")) bps.push_back({b.at("last_iter").get<int>(), b.at("eps").get<double>()});
  return EpsSchedule(std::move(bps), doc.at("terminal").get<double>());
}

EpsSchedule EpsSchedule::parse(const std::string& spec) {
  if (spec == "builtin:table2") return table2(1);
  if (spec.rfind("builtin:table2/", 0) == 0) return table2(std::stoi(spec.substr(15)));
  if (spec.rfind("const:", 0) == 0) return constant(std::stod(spec.substr(6)));
  std::ifstream in(spec);
  if (!in) throw std::invalid_argument("cannot open eps schedule '" + spec + "'");
  return from_json(in);
}

double EpsSchedule::at(int iter) const {
  for (const auto& b : breakpoints_)
    if (iter <= b.last_iter) return b.eps;
  return terminal_;
}

bool EpsSchedule::nonincreasing() const {
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& b : breakpoints_) {
    if (b.eps > prev) return false;
    prev = b.eps;
  }
  return terminal_ <= prev;
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kDCuP: return "dcup";
    case Algorithm::kStoDCuP: return "stodcup";
    case Algorithm::kIStoDCuP: return "istodcup";
    case Algorithm::kIStoDCuPCS: return "istodcup-cs";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "dcup") return Algorithm::kDCuP;
  if (name == "stodcup") return Algorithm::kStoDCuP;
  if (name == "istodcup") return Algorithm::kIStoDCuP;
  if (name == "istodcup-cs") return Algorithm::kIStoDCuPCS;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

void RunConfig::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
  if (max_iters < 0) fail("max_iters must be >= 0");
  if (warm_start_count < 0) fail("warm_start_count must be >= 0");
  if (ub_window < 1) fail("ub_window must be >= 1");
  if (ub_start < 1) fail("ub_start must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must be in (0,1)");
  if (!(gap_threshold >= 0.0)) fail("gap_threshold must be >= 0");
  if (!(exact_eps >= 1e-10) || !(first_stage_eps >= 1e-10)) fail("eps must be >= 1e-10");
  if (algo == Algorithm::kIStoDCuPCS && (cs_keep < 1 || cs_window < 0))
    fail("cut selection needs keep >= 1 and window >= 0");
}

void warm_start(SolverState& state, int count, CounterRng& rng) {
  const Problem& pb = *state.problem;
  const std::size_t n = pb.state_dim();
  auto draw = [&](const StateSet& box) {
    Vector x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
    return x;
  };
  for (std::size_t t = 0; t < pb.stage_count(); ++t) {
    for (std::size_t j = 0; j < child_count(pb, t); ++j) {
      const Realization& r = pb.realization(t, j);
      for (int w = 0; w < count; ++w) {
        const Vector x = draw(pb.state_set(t));
        const Vector xp = t == 0 ? pb.x0() : draw(pb.state_set(t - 1));
        state.model.objective(t, j).add(oracle_linearize(*r.objective, x, xp, 0));
        for (std::size_t i = 0; i < r.constraints.size(); ++i)
          state.model.constraint(t, j, i).add(oracle_linearize(*r.constraints[i], x, xp, 0));
      }
    }
  }
}

namespace {

void solve_children(std::vector<ChildRecord>& children, double eps, GapMeasure measure,
                     unsigned threads) {
  const std::size_t m = children.size();
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), m);
  if (workers <= 1) {
    for (auto& c : children) c.solution = lp_solve(c.lp, eps, measure);
    return;
  }
  std::vector<std::exception_ptr> errors(m);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < m; i += workers) {
          try {
            children[i].solution = lp_solve(children[i].lp, eps, measure);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

IterationReport forward_pass(SolverState& state, const std::vector<std::size_t>& path, double eps,
                             double first_stage_eps, GapMeasure measure, unsigned threads,
                             bool recenter) {
  const Problem& pb = *state.problem;
  const std::size_t T = pb.stage_count();
  if (path.size() != T) throw std::invalid_argument("forward_pass: path length mismatch");
  const int k = state.iteration + 1;

  IterationReport rep;
  rep.iter = k;
  rep.path = path;
  Vector x_n = pb.x0();

  for (std::size_t t = 0; t < T; ++t) {
    StageRecord st;
    st.t = t;
    st.x_prev = x_n;
    st.eps = t == 0 ? first_stage_eps : eps;
    const std::size_t M = child_count(pb, t);
    st.children.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
      st.children[m].j = m;
      st.children[m].prob = pb.realization(t, m).prob;
      st.children[m].lp = assemble_stage_lp(state.model, pb, t, m, x_n);
    }
    // The first-stage solve always uses the relative measure: its value is
    // the reported lower bound.
    const GapMeasure stage_measure = t == 0 ? GapMeasure::kRelative : measure;
    solve_children(st.children, st.eps, stage_measure, threads);
    if (recenter) {
      ChildRecord& c = st.children.at(path[t]);
      const Realization& r = pb.realization(t, c.j);
      bool violated = false;
      for (const auto& g : r.constraints) violated = violated || g->value(c.solution.x, x_n) > 0.0;
      if (violated) recenter_constraints(c.lp, c.solution, st.eps, stage_measure);
    }

    for (const auto& c : st.children) {
      rep.lp_solves += 1;
      rep.lp_iterations += c.solution.iterations;
      const LpSolution& s = c.solution;
      for (Eigen::Index r = 0; r < c.lp.constraint_rows(); ++r) {
        const double v = c.lp.con_d.row(r).dot(s.x) + c.lp.con_e.row(r).dot(x_n) + c.lp.con_h[r];
        rep.max_model_violation = std::max(rep.max_model_violation, v);
      }
    }
    if (t == 0) rep.lower_bound = st.children[0].solution.dual_value;

    // Model updates happen after every child has returned.
    for (const auto& c : st.children) {
      const Realization& r = pb.realization(t, c.j);
      const Vector& x = c.solution.x;
      AffineBundle& fb = state.model.objective(t, c.j);
      fb.add(oracle_linearize(*r.objective, x, x_n, k));
      rep.max_tightness_error = std::max(
          rep.max_tightness_error, std::abs(fb.evaluate(x, x_n) - r.objective->value(x, x_n)));
      for (std::size_t i = 0; i < r.constraints.size(); ++i) {
        AffineBundle& gb = state.model.constraint(t, c.j, i);
        gb.add(oracle_linearize(*r.constraints[i], x, x_n, k));
        rep.max_tightness_error =
            std::max(rep.max_tightness_error,
                     std::abs(gb.evaluate(x, x_n) - r.constraints[i]->value(x, x_n)));
      }
    }
    if (t > 0) {
      std::vector<ChildSolve> cs;
      for (const auto& c : st.children) cs.push_back({c.prob, &c.solution, &c.lp});
      st.cut = cut_from_duals(cs, k);
      state.model.future_cost(t - 1).add(*st.cut);
    }

    const std::size_t j = path[t];
    const Realization& r = pb.realization(t, j);
    const Vector x_next = st.children.at(j).solution.x;
    rep.forward_cost += r.objective->value(x_next, x_n);
    for (const auto& g : r.constraints)
      rep.max_violation = std::max(rep.max_violation, g->value(x_next, x_n));
    x_n = x_next;
    rep.stages.push_back(std::move(st));
  }

  state.iteration = k;
  state.forward_costs.push_back(rep.forward_cost);
  state.lower_bounds.push_back(rep.lower_bound);
  state.lp_solves += rep.lp_solves;
  state.lp_iterations += rep.lp_iterations;
  return rep;
}

double lower_bound(const SolverState& state) {
  if (state.lower_bounds.empty()) throw std::logic_error("lower_bound: no iteration done");
  return state.lower_bounds.back();
}

UpperBound upper_bound(const std::vector<double>& costs, double alpha) {
  if (costs.empty()) throw std::invalid_argument("upper_bound: empty window");
  const double N = static_cast<double>(costs.size());
  long double sum = 0.0L;
  for (double c : costs) sum += c;
  const double mean = static_cast<double>(sum / N);
  if (costs.size() == 1) return {mean, 0.0, mean, true};
  long double ss = 0.0L;
  for (double c : costs) ss += (static_cast<long double>(c) - mean) * (c - mean);
  const double sd = std::sqrt(static_cast<double>(ss / (N - 1.0)));
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - alpha);
  return {mean, sd, mean + z * sd / std::sqrt(N), false};
}

double stopping_gap(double lb, double ub) {
  return (ub - lb) / std::max(1.0, std::abs(ub));
}

std::vector<SimulatedCost> simulate_policy(const Problem& problem, const PolyhedralModel& model,
                                           int n_scenarios, CounterRng& rng) {
  std::vector<SimulatedCost> out;
  out.reserve(static_cast<std::size_t>(std::max(0, n_scenarios)));
  for (int s = 0; s < n_scenarios; ++s) {
    const auto path = sample_path(problem, rng);
    Vector x_n = problem.x0();
    SimulatedCost sc{0.0, 0.0};
    for (std::size_t t = 0; t < problem.stage_count(); ++t) {
      const Realization& r = problem.realization(t, path[t]);
      const LpSolution sol = lp_solve(assemble_stage_lp(model, problem, t, path[t], x_n), 1e-9);
      sc.cost += r.objective->value(sol.x, x_n);
      for (const auto& g : r.constraints)
        sc.max_violation = std::max(sc.max_violation, g->value(sol.x, x_n));
      x_n = sol.x;
    }
    out.push_back(sc);
  }
  return out;
}

RunResult run(const Problem& problem, const RunConfig& config, SolverState* state_out) {
  config.validate();
  RunResult result;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (config.algo == Algorithm::kDCuP) {
    DcupOptions opt;
    opt.max_iters = config.max_iters;
    opt.tol = config.gap_threshold;
    opt.warm_start_count = config.warm_start_count;
    opt.seed = config.seed;
    opt.eps = config.first_stage_eps;
    const DcupResult dr = dcup_run(problem, opt, state_out);
    for (const auto& r : dr.records) {
      BoundRecord b;
      b.iter = r.iter;
      b.lb = r.lb;
      b.ub = r.ub;
      b.ub_mean = r.ub;
      b.eps = opt.eps;
      b.max_violation = r.max_violation;
      b.wall_time_s = r.time_s;
      if (config.on_record) config.on_record(b);
      result.trace.push_back(b);
    }
    result.gap_met = dr.converged;
    if (!dr.records.empty()) result.final_gap = stopping_gap(dr.records.back().lb, dr.records.back().ub);
    result.elapsed_s = elapsed();
    return result;
  }

  const bool inexact = config.algo != Algorithm::kStoDCuP;
  SolverState state(problem, config.warm_start_count == 0);
  if (config.warm_start_count > 0) {
    CounterRng ws_rng(config.seed, RngStream::kWarmStart);
    warm_start(state, config.warm_start_count, ws_rng);
  }
  CounterRng path_rng(config.seed, RngStream::kPathSampling);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  result.final_gap = nan;

  for (int k = 1; k <= config.max_iters; ++k) {
    const double eps = inexact ? config.schedule.at(k) : config.exact_eps;
    const auto path = sample_path(problem, path_rng);
    const IterationReport rep =
        forward_pass(state, path, eps, config.first_stage_eps, config.gap_measure, config.threads,
                     config.recenter);
    if (config.algo == Algorithm::kIStoDCuPCS)
      cut_select_oldest(state.model, config.cs_keep, config.cs_window, k);
    if (config.observer) config.observer(rep, state.model);

    BoundRecord b;
    b.iter = k;
    b.lb = rep.lower_bound;
    b.ub = b.ub_mean = b.ub_std = nan;
    b.eps = eps;
    b.cuts_q_total = state.model.total_future_cuts();
    b.lp_solves = state.lp_solves;
    b.lp_iterations = state.lp_iterations;
    b.max_violation = rep.max_violation;
    if (k >= config.ub_start) {
      const auto& fc = state.forward_costs;
      const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(config.ub_window), fc.size());
      const std::vector<double> window(fc.end() - static_cast<std::ptrdiff_t>(w), fc.end());
      const UpperBound ub = upper_bound(window, config.alpha);
      b.ub = ub.ub;
      b.ub_mean = ub.mean;
      b.ub_std = ub.std;
    }
    b.wall_time_s = elapsed();
    if (config.on_record) config.on_record(b);
    result.trace.push_back(b);
    if (!std::isnan(b.ub)) {
      result.final_gap = stopping_gap(b.lb, b.ub);
      if (result.final_gap <= config.gap_threshold) {
        result.gap_met = true;
        break;
      }
    }
  }
  result.elapsed_s = elapsed();
  if (state_out) *state_out = std::move(state);
  return result;
}

namespace {

void put(std::ostream& os, double v) {
  if (std::isnan(v)) {
    os << "nan";
    return;
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, res.ptr - buf);
}

}  // namespace

void write_trace_header(std::ostream& os) {
  os << "iter,lb,ub,ub_mean,ub_std,eps,cuts_q_total,lp_solves,wall_time_s,lp_iterations,"
        "max_violation\n";
}

void write_trace_row(std::ostream& os, const BoundRecord& r, bool with_time) {
  os << r.iter << ',';
  put(os, r.lb);
  os << ',';
  put(os, r.ub);
  os << ',';
  put(os, r.ub_mean);
  os << ',';
  put(os, r.ub_std);
  os << ',';
  put(os, r.eps);
  os << ',' << r.cuts_q_total << ',' << r.lp_solves << ',';
  put(os, with_time ? r.wall_time_s : 0.0);
  os << ',' << r.lp_iterations << ',';
  put(os, r.max_violation);
  os << '\n';
}

}  // namespace nestedcuts
