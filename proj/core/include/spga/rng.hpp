#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace spga {

// Deterministic 64-bit generator: xoshiro256++ with splitmix64 seeding.
// Every random draw in the project flows through this type, so a run is a
// pure function of its seeds regardless of platform or thread count.
class Rng {
 public:
  // Algorithm identifier recorded in output artifacts.
  static constexpr std::string_view kAlgorithm = "xoshiro256++";

  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi]; degenerate lo == hi returns lo exactly.
  double uniform(double lo, double hi) {
    double v = lo + uniform() * (hi - lo);
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    return v;
  }

  // Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    const double u1 =
        static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform index in [0, n); n must be nonzero.
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % n);
  }

  // Derive an independent child stream; advances this generator once.
  Rng split() { return Rng(next_u64()); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::array<std::uint64_t, 4> state_;
};

}  // namespace spga
