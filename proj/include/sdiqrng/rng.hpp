#pragma once

#include <cstdint>
#include <limits>

namespace sdiqrng {

/// Seedable, splittable deterministic pseudorandom stream (xoshiro256++ core,
/// splitmix64 seeding). Child streams are a pure function of the root seed and
/// a key, so stream assignment never depends on scheduling or draw order.
/// This is a simulation RNG, not an entropy source.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Independent stream derived from this stream's identity and `key`.
  /// Does not consume or depend on the current draw position.
  Rng child(std::uint64_t key) const;

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform();

  double normal(double mean, double stddev);

  /// Exact samplers (no large-mean approximation; callers handle crossovers).
  std::int64_t poisson(double mean);
  std::int64_t binomial(std::int64_t n, double p);
  double gamma(double shape, double scale);

 private:
  Rng() = default;

  std::uint64_t state_[4];
  std::uint64_t root_;  // stream identity used for child derivation
};

}  // namespace sdiqrng
