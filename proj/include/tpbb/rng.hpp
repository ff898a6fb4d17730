#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace tpbb {

/// Seedable 64-bit generator used everywhere; its name goes into run metadata.
using Rng = std::mt19937_64;
inline constexpr std::string_view kRngName = "mt19937_64";

// The helpers below only use raw 64-bit draws, so streams are reproducible
// across standard library implementations.

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform index in [0, n) by 128-bit multiply-shift. n must be > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  __extension__ using u128 = unsigned __int128;
  const u128 m = static_cast<u128>(rng()) * n;
  return static_cast<std::size_t>(m >> 64);
}

/// floor(x) + Bernoulli(x - floor(x)); its expectation is x. Requires x >= 0.
long long stochastic_round(double x, Rng& rng);

/// Stochastic rounding of a and b driven by one shared uniform: each result
/// is marginally a stochastic rounding, and the round-up events are as
/// disjoint as possible, so the sum never exceeds ceil(a + b) and never
/// exceeds an integer bound that a + b itself respects.
std::pair<long long, long long> stochastic_round_pair(double a, double b, Rng& rng);

/// n independent uniform samples on [a, b]. Requires a < b.
std::vector<double> sample_uniform(double a, double b, std::size_t n, Rng& rng);

/// Partial Fisher-Yates: after the call the first k entries of `indices` are a
/// uniformly random k-subset of its contents, in random order.
void partial_shuffle(std::vector<std::size_t>& indices, std::size_t k, Rng& rng);

}  // namespace tpbb
