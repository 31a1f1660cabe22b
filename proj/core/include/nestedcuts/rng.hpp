#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace nestedcuts {

/// Independent purposes that each own a random stream.
enum class RngStream : std::uint64_t {
  kInstance = 1,
  kPathSampling = 2,
  kWarmStart = 3,
  kSimulation = 4,
};

/// Counter-based 64-bit generator (SplitMix64 finalizer over key + counter).
///
/// Draw i of stream (seed, s) is a pure function of (seed, s, i), so streams
/// never overlap in practice and can be re-positioned with `discard`.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);
  CounterRng(std::uint64_t seed, RngStream stream)
      : CounterRng(seed, static_cast<std::uint64_t>(stream)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();
  void discard(std::uint64_t n) { counter_ += n; }
  std::uint64_t counter() const { return counter_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal();
  /// Index drawn with the given probabilities. Zero-probability entries are
  /// never returned.
  std::size_t discrete(std::span<const double> probs);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace nestedcuts
