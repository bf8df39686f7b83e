// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <random>

namespace cdp {

// splitmix64 finalizer; used to derive independent substream seeds from a
// master seed, so batched work is reproducible regardless of worker count.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random source. All sampling in the library takes one of these by
// reference; there is no global randomness anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for item `index` under a master seed.
  static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(splitmix64(master_seed ^ splitmix64(index + 1)));
  }

  double uniform() { return unit_(engine_); }

  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }

  double exponential(double rate) {
    return std::exponential_distribution<double>(rate)(engine_);
  }

  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }

  // Inverse gamma with shape a and scale b: 1/Gamma(a, rate=b).
  double inverse_gamma(double shape, double scale) {
    return 1.0 / std::gamma_distribution<double>(shape, 1.0 / scale)(engine_);
  }

  std::size_t uniform_index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace cdp
