// Seeded, stream-splittable random source.
//
// One generator type is used repo-wide. A stream is addressed by
// (seed, stream); per-run streams are derived from a master seed and a run
// index, so concurrent runs never share generator state. The same
// (seed, stream, draw index) yields the same value within one build; we do
// not promise bit-equality across compilers or standard libraries.

#ifndef ADASTEP_RNG_HPP
#define ADASTEP_RNG_HPP

#include <cstdint>
#include <random>

#include "adastep/vec.hpp"

namespace adastep {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    // Mix seed and stream through splitmix64 so that nearby seeds and
    // streams land far apart in the engine's state space.
    std::uint64_t s = seed;
    (void)detail::splitmix64(s);
    s ^= 0xD6E8FEB86659FD93ULL * (stream + 1);
    engine_.seed(detail::splitmix64(s));
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + uniform01() * (b - a); }

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  Vector normal_vector(std::size_t dim) {
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  /// Log-uniform over [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace adastep

#endif  // ADASTEP_RNG_HPP
