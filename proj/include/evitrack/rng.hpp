#pragma once

#include <cmath>
#include <cstdint>

namespace evitrack {

// Deterministic 64-bit generator: xoshiro256++ seeded through splitmix64.
// The algorithm is fixed by this header (never std:: distributions), so a
// given seed yields the same draw sequence on every platform and build.
//
// Stream splitting: derive_stream(seed, k1, k2, k3) hashes the keys into an
// independent generator. The simulator derives one stream per
// (trial, frame, component), so adding draws to one component never perturbs
// any other component's sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
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

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

  bool bernoulli(double p) { return next_double() < p; }

  // Box-Muller without caching: exactly two uniform draws per call.
  double normal(double mean, double sigma) {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return mean + sigma * r * std::cos(two_pi * u2);
  }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  static std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

inline std::uint64_t mix_keys(std::uint64_t seed, std::uint64_t k1 = 0,
                              std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
  std::uint64_t s = seed;
  std::uint64_t acc = Rng::splitmix64(s);
  s ^= k1 + 0x9e3779b97f4a7c15ULL;
  acc ^= Rng::splitmix64(s);
  s ^= k2 + 0xd1b54a32d192ed03ULL;
  acc ^= Rng::splitmix64(s);
  s ^= k3 + 0x8ebc6af09c88c6e3ULL;
  acc ^= Rng::splitmix64(s);
  return acc;
}

inline Rng derive_stream(std::uint64_t seed, std::uint64_t k1 = 0,
                         std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
  return Rng(mix_keys(seed, k1, k2, k3));
}

}  // namespace evitrack
