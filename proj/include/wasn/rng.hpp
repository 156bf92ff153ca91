#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace wasn {

// Deterministic random source. mt19937_64 supplies the raw bits; the
// Gaussian transform is an explicit Box-Muller so that streams are
// bit-reproducible across standard libraries (std::normal_distribution is
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer on [lo, hi] via fixed-width rejection.
  int uniform_int(int lo, int hi);

  // Standard normal, Box-Muller with one cached deviate.
  double normal();

  // Circularly symmetric complex normal, unit variance: each component
  // N(0, 1/2).
  std::complex<double> cnormal() {
    const double s = 0.7071067811865476;  // 1/sqrt(2)
    return {normal() * s, normal() * s};
  }

  // Derives an independent stream seed from (seed, stream) via splitmix64,
  // so per-trial / per-purpose generators never overlap by construction.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wasn
