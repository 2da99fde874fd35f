#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace textsculpt {

/// Deterministic random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard library distributions are not (their algorithms are
/// implementation-defined), so every draw below is derived from raw engine
/// output to keep byte-identical results across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for one unit of work, keyed by (global seed, index).
  static Rng for_sample(std::uint64_t global_seed, std::uint64_t index);

  /// Child stream split off this one; consumes one draw from the parent.
  Rng fork() { return Rng(mix(next_u64())); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(static_cast<long long>(hi) - lo + 1)));
  }

  bool bernoulli(double p) { return p > 0.0 && (p >= 1.0 || uniform01() < p); }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

  static std::uint64_t mix(std::uint64_t x);

 private:
  std::mt19937_64 engine_;
};

}  // namespace textsculpt
