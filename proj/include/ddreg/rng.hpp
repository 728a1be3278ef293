#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ddreg {

// SplitMix64 finalizer; used only to derive independent child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the child stream reached by following `path` from `seed`.
// derive_seed(s, {r, 1}) depends only on (s, r, 1).
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (auto k : path) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  return Engine{derive_seed(seed, path)};
}

inline double uniform01(Engine& rng) {
  return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

inline double std_normal(Engine& rng) { return std::normal_distribution<double>{0.0, 1.0}(rng); }

inline double gamma_variate(Engine& rng, double shape) {
  return std::gamma_distribution<double>{shape, 1.0}(rng);
}

// Beta(a, b) as a ratio of independent gamma variates.
inline double beta_variate(Engine& rng, double a, double b) {
  const double x = gamma_variate(rng, a);
  const double y = gamma_variate(rng, b);
  return x / (x + y);
}

}  // namespace ddreg
