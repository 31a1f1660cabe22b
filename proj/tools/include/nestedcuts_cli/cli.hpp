#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nestedcuts::cli {

inline constexpr int kExitGapMet = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitMaxIters = 2;
inline constexpr int kExitUsage = 64;

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct TracePoint {
  double iter;
  double lb;
  double ub;  // NaN where undefined
};

/// Reads the iter, lb and ub columns of a solve trace. Throws
/// std::runtime_error on malformed input.
std::vector<TracePoint> read_trace_csv(std::istream& is);

/// Standalone SVG of the lower and upper bound curves. The y axis switches to
/// a symmetric log scale when the finite values span more than four decades.
std::string render_bounds_svg(const std::vector<TracePoint>& points);

}  // namespace nestedcuts::cli
