#include "tpbb/rng.hpp"

#include <utility>

#include "tpbb/errors.hpp"

namespace tpbb {

long long stochastic_round(double x, Rng& rng) {
  if (!(x >= 0.0)) throw ValidationError("stochastic_round: argument must be >= 0");
  const double fl = std::floor(x);
  const double frac = x - fl;
  return static_cast<long long>(fl) + (uniform01(rng) < frac ? 1 : 0);
}

std::pair<long long, long long> stochastic_round_pair(double a, double b, Rng& rng) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw ValidationError("stochastic_round_pair: arguments must be >= 0");
  const double fa = std::floor(a);
  const double fb = std::floor(b);
  const double ra = a - fa;
  const double rb = b - fb;
  const double u = uniform01(rng);
  double w = u - ra;
  if (w < 0.0) w += 1.0;
  return {static_cast<long long>(fa) + (u < ra ? 1 : 0), static_cast<long long>(fb) + (w < rb ? 1 : 0)};
}

std::vector<double> sample_uniform(double a, double b, std::size_t n, Rng& rng) {
  if (!(a < b)) throw ValidationError("sample_uniform: requires a < b");
  std::vector<double> out(n);
  for (auto& x : out) x = a + (b - a) * uniform01(rng);
  return out;
}

void partial_shuffle(std::vector<std::size_t>& indices, std::size_t k, Rng& rng) {
  const std::size_t n = indices.size();
  for (std::size_t i = 0; i < k && i < n; ++i) {
    const std::size_t j = i + uniform_index(rng, n - i);
    std::swap(indices[i], indices[j]);
  }
}

}  // namespace tpbb
