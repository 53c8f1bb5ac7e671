#pragma once

#include <cstdint>
#include <random>

namespace salab {

// 64-bit Mersenne Twister with a platform-independent uniform draw.
// std::uniform_real_distribution is implementation-defined, so runs would not
// be byte-identical across standard libraries; this one is.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on (0, 1): the midpoint of one of 2^53 equal cells.
  double uniform01() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const auto i = static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace salab
