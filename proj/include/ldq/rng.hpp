#pragma once

#include <cstdint>
#include <random>

namespace ldq {

/// Seedable stream family. A stream is identified by (master seed, index);
/// distinct indices give statistically independent engines, and the same
/// pair always reproduces the same sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}

  Rng(std::uint64_t master, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x6c64u};
    engine_.seed(seq);
  }

  static Rng stream(std::uint64_t master, std::uint64_t index) { return Rng(master, index); }

  /// Uniform on the open interval (0, 1), 53 bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform index in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ldq
