#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "homsim/constants.hpp"
#include "homsim/vec.hpp"

namespace homsim {

// Counter-seeded random stream. xoshiro256** state expanded from
// (seed, stream) with SplitMix64, so every task in a parallel run owns an
// independent stream that depends only on the master seed and its index.
// All distribution transforms are implemented here instead of <random> so
// that a fixed seed gives bit-identical output on every standard library.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller. Two uniforms per draw, no cached spare,
  // so the draw count per event is fixed and streams stay reproducible.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(constants::two_pi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // Exponential with the given rate (mean 1/rate).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  // Gamma with shape 3 as a sum of three exponentials.
  double gamma3(double scale) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s -= std::log1p(-uniform());
    return scale * s;
  }

  // Uniform direction on the unit sphere.
  Vec3 isotropic_direction() {
    const double cos_theta = 2.0 * uniform() - 1.0;
    const double sin_theta = std::sqrt(1.0 - cos_theta * cos_theta);
    const double phi = constants::two_pi * uniform();
    return {sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta};
  }

  // Poisson by inverse transform on exponential gaps; intended for the
  // small means of dark-count windows.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::uint64_t n = 0;
    double t = exponential(1.0);
    while (t < mean) {
      ++n;
      t += exponential(1.0);
    }
    return n;
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

} // namespace homsim
