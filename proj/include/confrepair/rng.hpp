#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace confrepair {

/// Seeded random source used everywhere randomness is needed.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard)
/// and maps raw 64-bit draws to uniform values itself, so that the same
/// seed yields the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double on [lo, hi]. lo == hi returns lo.
  double uniform_real(double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("uniform_real: lo > hi");
    double v = lo + uniform01() * (hi - lo);
    return v > hi ? hi : v;
  }

  /// Uniform integer on the inclusive range [lo, hi], bias-free.
  long long uniform_int(long long lo, long long hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
    const std::uint64_t span =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) return static_cast<long long>(engine_());  // full 64-bit range
    const std::uint64_t reject_above =
        std::numeric_limits<std::uint64_t>::max() -
        (std::numeric_limits<std::uint64_t>::max() % span + 1) % span;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x > reject_above);
    return lo + static_cast<long long>(x % span);
  }

  /// Uniform index in [0, n).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    return static_cast<std::size_t>(uniform_int(0, static_cast<long long>(n) - 1));
  }

  bool coin_flip() { return (engine_() & 1u) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace confrepair
