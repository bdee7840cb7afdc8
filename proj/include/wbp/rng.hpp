#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace wbp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seedable random stream with hand-rolled variate generation so that draws
/// are reproducible bit-for-bit across standard libraries and platforms.
///
/// Substream rule: replicate i of master seed s seeds its engine with two
/// splitmix64 outputs taken from state s XOR (i+1)*0x9E3779B97F4A7C15.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t state = master_seed ^ ((index + 1) * 0x9E3779B97F4A7C15ULL);
    std::uint64_t a = splitmix64(state);
    std::uint64_t b = splitmix64(state);
    return Rng(a ^ (b << 1));
  }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Centered normal via Box-Muller (no cached spare: two uniforms per draw).
  double normal(double sigma) {
    double u1 = uniform_pos();
    double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Poisson by Knuth multiplication; large means are halved recursively to
  /// stay clear of exp() underflow. Cost is O(lambda).
  long poisson(double lambda) {
    long total = 0;
    while (lambda > 30.0) {
      double half = lambda / 2.0;
      total += poisson_small(half);
      lambda -= half;
    }
    return total + poisson_small(lambda);
  }

 private:
  long poisson_small(double lambda) {
    double limit = std::exp(-lambda);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 eng_;
};

}  // namespace wbp
