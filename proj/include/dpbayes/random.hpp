#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace dpbayes {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent key from a root seed and a path of integer keys.
/// Mechanisms key their draws by entry / coefficient / repeat so results do
/// not depend on iteration order.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  const std::uint64_t key = derive_seed(seed, keys);
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return Rng(seq);
}

/// Uniform in the open interval (0, 1) from the top 53 bits of a 64-bit word.
constexpr double bits_to_open01(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform01(Rng& rng) { return bits_to_open01(rng()); }

/// One keyed uniform without constructing a generator (counter-based draw).
inline double keyed_uniform(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return bits_to_open01(mix64(derive_seed(seed, keys)));
}

/// Laplace(0, scale) by inverse CDF of a single uniform in (0, 1).
inline double laplace_from_uniform(double scale, double u) {
  const double centered = u - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(centered));
  return centered < 0.0 ? -magnitude : magnitude;
}

inline double sample_beta(double alpha, double beta, Rng& rng) {
  std::gamma_distribution<double> ga(alpha, 1.0);
  std::gamma_distribution<double> gb(beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (x + y == 0.0) return alpha >= beta ? 1.0 : 0.0;
  return x / (x + y);
}

}  // namespace dpbayes
