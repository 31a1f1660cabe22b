#include "nestedcuts_cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "nestedcuts/cuts.hpp"
#include "nestedcuts/instances.hpp"
#include "nestedcuts/stodcup.hpp"

namespace nestedcuts::cli {

namespace {

struct GenerateArgs {
  int T = 3;
  int n = 10;
  int M = 2;
  std::uint64_t seed = 1;
  std::string out;
  bool force = false;
};

struct SolveArgs {
  std::string algo = "stodcup";
  std::string instance;
  double gap = 0.1;
  int max_iters = 1000;
  std::uint64_t seed = 1;
  std::string eps_schedule = "builtin:table2";
  int ub_window = 200;
  int ub_start = 200;
  double alpha = 0.05;
  int cs_keep = 350;
  int cs_window = 350;
  int warm_start = 20;
  std::string trace;
  std::string bundles;
  std::string dump_lp;
  std::optional<unsigned> threads;
  int simulate = 0;
  bool timing = false;
  bool no_recenter = false;
};

struct PlotArgs {
  std::string trace;
  std::string out;
};

unsigned resolve_threads(const std::optional<unsigned>& flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("NESTEDCUTS_THREADS")) {
    unsigned v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    if (auto [p, ec] = std::from_chars(env, end, v); ec == std::errc() && p == end && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.T < 1 || a.n < 1 || a.M < 1) {
    err << "error: T, n and M must be positive\n";
    return kExitUsage;
  }
  if (!a.force && std::filesystem::exists(a.out)) {
    err << "error: " << a.out << " exists (pass --force to overwrite)\n";
    return kExitFailure;
  }
  const PbsimInstance inst = generate_pbsim(a.T, a.n, a.M, a.seed);
  std::ofstream os(a.out, std::ios::binary);
  if (!os) {
    err << "error: cannot write " << a.out << "\n";
    return kExitFailure;
  }
  write_instance_json(os, inst);
  if (!os) {
    err << "error: write to " << a.out << " failed\n";
    return kExitFailure;
  }
  out << "wrote " << a.out << " (T=" << a.T << " n=" << a.n << " M=" << a.M << " seed=" << a.seed << ")\n";
  return kExitGapMet;
}

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg.algo = parse_algorithm(a.algo);
    cfg.schedule = EpsSchedule::parse(a.eps_schedule);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  cfg.gap_threshold = a.gap;
  cfg.max_iters = a.max_iters;
  cfg.seed = a.seed;
  cfg.ub_window = a.ub_window;
  cfg.ub_start = a.ub_start;
  cfg.alpha = a.alpha;
  cfg.cs_keep = a.cs_keep;
  cfg.cs_window = a.cs_window;
  cfg.warm_start_count = a.warm_start;
  cfg.threads = resolve_threads(a.threads);
  cfg.recenter = !a.no_recenter;
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (!cfg.schedule.nonincreasing()) err << "warning: eps schedule is not nonincreasing\n";

  PbsimInstance inst;
  try {
    inst = load_instance(a.instance);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  const Problem problem = build_problem(inst);
  if (cfg.algo == Algorithm::kDCuP && !problem.deterministic()) {
    err << "error: dcup requires deterministic instance\n";
    return kExitUsage;
  }

  std::ofstream trace;
  if (!a.trace.empty()) {
    trace.open(a.trace, std::ios::binary);
    if (!trace) {
      err << "error: cannot write " << a.trace << "\n";
      return kExitFailure;
    }
    write_trace_header(trace);
    cfg.on_record = [&](const BoundRecord& r) {
      write_trace_row(trace, r, a.timing);
      trace.flush();
    };
  }

  SolverState state(problem);
  RunResult res;
  try {
    res = run(problem, cfg, &state);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  if (!a.bundles.empty()) {
    std::ofstream os(a.bundles, std::ios::binary);
    write_bundles_csv(os, state.model);
    if (!os) err << "error: cannot write " << a.bundles << "\n";
  }
  if (!a.dump_lp.empty()) {
    std::ofstream os(a.dump_lp, std::ios::binary);
    write_lp_text(os, assemble_stage_lp(state.model, problem, 0, 0, problem.x0()));
    if (!os) err << "error: cannot write " << a.dump_lp << "\n";
  }

  const int iters = res.trace.empty() ? 0 : res.trace.back().iter;
  const double lb = res.trace.empty() ? std::numeric_limits<double>::quiet_NaN() : res.trace.back().lb;
  const double ub = res.trace.empty() ? std::numeric_limits<double>::quiet_NaN() : res.trace.back().ub;
  out << std::setprecision(10);
  out << "algo " << to_string(cfg.algo) << "\n"
      << "iters " << iters << "\n"
      << "lb " << lb << "\n"
      << "ub " << ub << "\n"
      << "gap " << res.final_gap << "\n"
      << "time_s " << std::setprecision(4) << res.elapsed_s << "\n"
      << "status " << (res.gap_met ? "gap met" : "max iterations reached") << "\n";

  if (a.simulate > 0 && !res.trace.empty()) {
    CounterRng rng(cfg.seed, RngStream::kSimulation);
    const auto sims = simulate_policy(problem, state.model, a.simulate, rng);
    double sum = 0.0, viol = 0.0;
    for (const auto& s : sims) {
      sum += s.cost;
      viol = std::max(viol, s.max_violation);
    }
    out << std::setprecision(10) << "sim_mean " << sum / static_cast<double>(sims.size()) << "\n"
        << "sim_max_violation " << viol << "\n";
  }
  return res.gap_met ? kExitGapMet : kExitMaxIters;
}

int cmd_plot(const PlotArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.trace, std::ios::binary);
  if (!in) {
    err << "error: cannot read " << a.trace << "\n";
    return kExitFailure;
  }
  std::vector<TracePoint> pts;
  try {
    pts = read_trace_csv(in);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  std::ofstream os(a.out, std::ios::binary);
  os << render_bounds_svg(pts);
  if (!os) {
    err << "error: cannot write " << a.out << "\n";
    return kExitFailure;
  }
  out << "wrote " << a.out << " (" << pts.size() << " rows)\n";
  return kExitGapMet;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) {
    throw std::runtime_error("malformed CSV: bad number '" + s + "' on line " + std::to_string(line));
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, r.ptr);
}

std::string tick_label(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= 6.0) break;
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
    ticks.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return ticks;
}

}  // namespace

std::vector<TracePoint> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("malformed CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  auto col = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error(std::string("malformed CSV: no column ") + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ci = col("iter"), cl = col("lb"), cu = col("ub");
  std::vector<TracePoint> pts;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("malformed CSV: wrong column count on line " + std::to_string(lineno));
    }
    pts.push_back({parse_number(cells[ci], lineno), parse_number(cells[cl], lineno),
                   parse_number(cells[cu], lineno)});
  }
  return pts;
}

std::string render_bounds_svg(const std::vector<TracePoint>& points) {
  constexpr double kW = 800, kH = 480, kLeft = 90, kRight = 150, kTop = 30, kBottom = 60;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;

  double amax = 0.0, amin = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    for (double v : {p.lb, p.ub}) {
      if (!std::isfinite(v)) continue;
      amax = std::max(amax, std::abs(v));
      if (v != 0.0) amin = std::min(amin, std::abs(v));
    }
  }
  const bool symlog = std::isfinite(amin) && amax / amin > 1e4;
  auto ty = [&](double v) { return symlog ? std::copysign(std::log10(1.0 + std::abs(v)), v) : v; };

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& p : points) {
    xlo = std::min(xlo, p.iter);
    xhi = std::max(xhi, p.iter);
    for (double v : {p.lb, p.ub}) {
      if (!std::isfinite(v)) continue;
      ylo = std::min(ylo, ty(v));
      yhi = std::max(yhi, ty(v));
    }
  }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1;
  if (xhi <= xlo) xlo -= 0.5, xhi += 0.5;
  if (!std::isfinite(ylo)) ylo = 0, yhi = 1;
  if (yhi <= ylo) ylo -= 1.0, yhi += 1.0;
  const double pad = 0.05 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;

  auto sx = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
  auto sy = [&](double y) { return kTop + (yhi - y) / (yhi - ylo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : nice_ticks(xlo, xhi)) {
    os << "<line x1=\"" << fmt(sx(t)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << fmt(sx(t)) << "\" y2=\""
       << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(sx(t)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
       << tick_label(t) << "</text>\n";
  }
  std::vector<std::pair<double, std::string>> yticks;
  if (symlog) {
    if (ylo <= 0.0 && yhi >= 0.0) yticks.emplace_back(0.0, "0");
    for (int e = 0; e <= 308; ++e) {
      const double v = std::pow(10.0, e);
      const double y = std::log10(1.0 + v);
      if (y > std::max(std::abs(ylo), std::abs(yhi))) break;
      const std::string lab = "1e" + std::to_string(e);
      if (y >= ylo && y <= yhi) yticks.emplace_back(y, lab);
      if (-y >= ylo && -y <= yhi) yticks.emplace_back(-y, "-" + lab);
    }
    // Drop labels that would overlap an earlier one; zero comes first.
    std::vector<std::pair<double, std::string>> kept;
    for (const auto& t : yticks) {
      bool clear = true;
      for (const auto& k : kept) clear = clear && std::abs(sy(t.first) - sy(k.first)) >= 16.0;
      if (clear) kept.push_back(t);
    }
    yticks = std::move(kept);
  } else {
    for (double t : nice_ticks(ylo, yhi)) yticks.emplace_back(t, tick_label(t));
  }
  for (const auto& [y, lab] : yticks) {
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(sy(y)) << "\" x2=\"" << kLeft << "\" y2=\""
       << fmt(sy(y)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(sy(y) + 4) << "\" text-anchor=\"end\">" << lab
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 15 << "\" text-anchor=\"middle\">iteration</text>\n";
  os << "<text x=\"20\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << kTop + ph / 2 << ")\">" << (symlog ? "bound (symmetric log scale)" : "bound") << "</text>\n";

  auto curve = [&](auto get, const char* color, const char* cls) {
    std::string pts;
    auto flush = [&] {
      if (!pts.empty()) {
        os << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
      }
      pts.clear();
    };
    for (const auto& p : points) {
      const double v = get(p);
      if (!std::isfinite(v)) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += fmt(sx(p.iter)) + ',' + fmt(sy(ty(v)));
    }
    flush();
  };
  curve([](const TracePoint& p) { return p.lb; }, "#1f77b4", "lb");
  curve([](const TracePoint& p) { return p.ub; }, "#d62728", "ub");

  const double lx = kLeft + pw + 15;
  os << "<line x1=\"" << lx << "\" y1=\"" << kTop + 10 << "\" x2=\"" << lx + 25 << "\" y2=\"" << kTop + 10
     << "\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";
  os << "<text x=\"" << lx + 30 << "\" y=\"" << kTop + 14 << "\">lower bound</text>\n";
  os << "<line x1=\"" << lx << "\" y1=\"" << kTop + 30 << "\" x2=\"" << lx + 25 << "\" y2=\"" << kTop + 30
     << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
  os << "<text x=\"" << lx + 30 << "\" y=\"" << kTop + 34 << "\">upper bound</text>\n";
  os << "</svg>\n";
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cutting-plane solver for multistage stochastic convex programs"};
  app.require_subcommand(1);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Write a random test instance as JSON");
  gen->add_option("--T", ga.T, "Number of stages")->required();
  gen->add_option("--n", ga.n, "State dimension")->required();
  gen->add_option("--M", ga.M, "Realizations per stage after the first")->required();
  gen->add_option("--seed", ga.seed, "Random seed");
  gen->add_option("--out", ga.out, "Output file")->required();
  gen->add_flag("--force", ga.force, "Overwrite an existing file");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Run a solver on an instance");
  solve->add_option("--algo", sa.algo, "dcup, stodcup, istodcup or istodcup-cs")
      ->check(CLI::IsMember({"dcup", "stodcup", "istodcup", "istodcup-cs"}));
  solve->add_option("--instance", sa.instance, "Instance JSON")->required();
  solve->add_option("--gap", sa.gap, "Relative gap threshold");
  solve->add_option("--max-iters", sa.max_iters, "Iteration cap");
  solve->add_option("--seed", sa.seed, "Seed for warm start and path sampling");
  solve->add_option("--eps-schedule", sa.eps_schedule,
                    "builtin:table2, builtin:table2/N, const:EPS or a JSON schedule file");
  solve->add_option("--ub-window", sa.ub_window, "Forward costs used by the upper bound");
  solve->add_option("--ub-start", sa.ub_start, "First iteration with an upper bound");
  solve->add_option("--alpha", sa.alpha, "One-sided confidence level of the upper bound");
  solve->add_option("--cs-keep", sa.cs_keep, "Cut selection: cuts kept per cost-to-go bundle");
  solve->add_option("--cs-window", sa.cs_window, "Cut selection: number of selecting iterations");
  solve->add_option("--warm-start", sa.warm_start, "Initial linearizations per function");
  solve->add_option("--trace", sa.trace, "Trace CSV output");
  solve->add_option("--bundles", sa.bundles, "Final bundles CSV output");
  solve->add_option("--dump-lp", sa.dump_lp, "Write the final first-stage LP as text");
  solve->add_option("--threads", sa.threads, "Worker threads for child solves");
  solve->add_option("--simulate", sa.simulate, "Simulate the final policy on N scenarios");
  solve->add_flag("--timing", sa.timing, "Record wall time in the trace");
  solve->add_flag("--no-recenter", sa.no_recenter, "Keep trial points where the LP solver leaves them");

  PlotArgs pa;
  auto* plot = app.add_subcommand("plot", "Render the bounds of a trace as SVG");
  plot->add_option("--trace", pa.trace, "Trace CSV")->required();
  plot->add_option("--out", pa.out, "SVG output")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitGapMet;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (*gen) return cmd_generate(ga, out, err);
  if (*solve) return cmd_solve(sa, out, err);
  return cmd_plot(pa, out, err);
}

}  // namespace nestedcuts::cli
