#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace titan::core {

// Deterministic splitmix64 stream.  Standard-library distributions are
// implementation-defined, so all randomness in the project goes through this
// generator to keep corpora and training runs reproducible byte for byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n >= 1.  Modulo bias is negligible for the
  // small ranges used here and keeps the draw count fixed.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  int index(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; consumes exactly two uniforms per call (no cached spare, so
  // the draw sequence stays position-independent).
  double normal() {
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Derive an independent stream from this one (hash-mix, not sequential
  // splitting), e.g. one stream per clip from a corpus seed.
  Rng fork(std::uint64_t salt) {
    Rng mix(state_ ^ (0x632be59bd9b4e019ull * (salt + 1)));
    return Rng(mix.next_u64());
  }

 private:
  std::uint64_t state_;
};

}  // namespace titan::core
