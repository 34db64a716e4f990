#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace tddsim {

// splitmix64 step; used to derive child seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from (seed, tag words). Every consumer of randomness
/// gets its own stream keyed by purpose, so loop order and parallelism never
/// change what a given entity draws.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = seed;
  for (std::uint64_t t : tags) {
    s ^= splitmix64(s) + t;
    splitmix64(s);
  }
  return splitmix64(s);
}

/// A deterministic random stream. Draw functions are hand-rolled on top of
/// mt19937_64 (whose output sequence is fixed by the standard) so that a
/// fixed seed replays bit-identically.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Unit-mean exponential via inverse CDF.
  double exponential() { return -std::log(1.0 - u01()); }

  bool bernoulli(double p) { return u01() < p; }

  // Uniform over {0, ..., n-1}; n must be positive.
  std::size_t uniform_index(std::size_t n) {
    std::size_t i = static_cast<std::size_t>(u01() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Poisson count as the number of unit-exponential gaps fitting in `mean`.
  // O(mean) draws; fine for the per-realization counts used here.
  std::int64_t poisson(double mean) {
    std::int64_t k = 0;
    double acc = exponential();
    while (acc <= mean) {
      ++k;
      acc += exponential();
    }
    return k;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace tddsim
