// Philox4x32-10 counter-based generator with explicit
// stream ids, plus the handful of distributions the generator and the
// baselines need. Everything is defined here so draws are identical across
// standard libraries.

#ifndef CNMF_RANDOM_HPP
#define CNMF_RANDOM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cnmf {

class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream) : key_{lo(seed), hi(seed)}, stream_(stream) {}

  /// Next 64 random bits.
  std::uint64_t next() {
    if (used_ >= 2) refill();
    const std::uint64_t out =
        (static_cast<std::uint64_t>(block_[2 * used_]) << 32) | static_cast<std::uint64_t>(block_[2 * used_ + 1]);
    ++used_;
    return out;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal by Box-Muller; one draw per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Exponential with the given mean, by inverse CDF.
  double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n; }

  /// Raw block for a given counter; exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
      ctr = {hi32(p1) ^ ctr[1] ^ key[0], lo32(p1), hi32(p0) ^ ctr[3] ^ key[1], lo32(p0)};
      key[0] += W0;
      key[1] += W1;
    }
    return ctr;
  }

 private:
  static std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
  static std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }
  static std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
  static std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

  void refill() {
    block_ = block({lo(counter_), hi(counter_), lo(stream_), hi(stream_)}, key_);
    ++counter_;
    used_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 2;
};

/// Stream ids keep independent uses of one seed apart.
namespace streams {
inline constexpr std::uint64_t instance = 0x1000;
inline constexpr std::uint64_t noise = 0x2000;  // + noise kind
inline constexpr std::uint64_t init = 0x3000;
}  // namespace streams

/// Mixes two 64-bit values into a derived seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace cnmf

#endif  // CNMF_RANDOM_HPP
