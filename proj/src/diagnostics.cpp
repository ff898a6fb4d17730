#include "tpbb/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "tpbb/errors.hpp"

namespace tpbb {

DensityHistogram histogram(std::span<const double> samples, double dx, double mass, double lo,
                           double hi) {
  if (samples.empty()) throw EmptySampleSet("histogram: no samples");
  if (!(dx > 0.0)) throw ValidationError("histogram: dx must be > 0");
  if (!(mass > 0.0)) throw ValidationError("histogram: mass must be > 0");
  if (!(lo < hi)) throw ValidationError("histogram: requires lo < hi");
  const double width = hi - lo;
  const auto bins = static_cast<long long>(std::llround(width / dx));
  if (bins < 1 || std::abs(static_cast<double>(bins) * dx - width) > 1e-9 * width) {
    throw ValidationError("histogram: dx must divide the domain width");
  }
  DensityHistogram h{lo, hi, dx, mass, std::vector<double>(static_cast<std::size_t>(bins), 0.0)};
  std::vector<long long> counts(static_cast<std::size_t>(bins), 0);
  for (double x : samples) {
    long long b = static_cast<long long>(std::floor((x - lo) / dx));
    b = std::clamp(b, 0LL, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const double scale = mass / (static_cast<double>(samples.size()) * dx);
  for (std::size_t i = 0; i < counts.size(); ++i) h.heights[i] = static_cast<double>(counts[i]) * scale;
  return h;
}

double mean_opinion(std::span<const double> samples) {
  if (samples.empty()) throw EmptySampleSet("mean_opinion: no samples");
  double s = 0.0;
  for (double x : samples) s += x;
  return s / static_cast<double>(samples.size());
}

namespace {

double mean_square_deviation(std::span<const double> xs, double ref) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += (x - ref) * (x - ref);
  return s / static_cast<double>(xs.size());
}

}  // namespace

double cost_increment(double t, double dt, std::span<const double> followers,
                      std::span<const double> leaders, double mean_u_sq, const CostParams& p) {
  const double running = p.a_f * mean_square_deviation(followers, p.reference) +
                         p.a_l * mean_square_deviation(leaders, p.reference) + p.gamma * mean_u_sq;
  return std::exp(-p.lambda * t) * dt * running;
}

std::vector<MomentPoint> linear_moment_odes(double mean_f0, double mean_l0, double /*rho_f*/,
                                            double rho_l,
                                            const std::function<double(double)>& drift,
                                            double final_time, double dt_ode) {
  if (!(dt_ode > 0.0)) throw ValidationError("linear_moment_odes: dt_ode must be > 0");
  // The follower-follower term integrates to rho_F (m_F - m_F) = 0.
  const auto rhs = [&](double t, double mf, double ml) {
    return std::pair{rho_l * (ml - mf), drift(t)};
  };
  std::vector<MomentPoint> out{{0.0, mean_f0, mean_l0}};
  const auto steps = static_cast<long long>(std::ceil(final_time / dt_ode - 1e-9));
  double mf = mean_f0;
  double ml = mean_l0;
  for (long long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * dt_ode;
    const double h = std::min(dt_ode, final_time - t);
    const auto [k1f, k1l] = rhs(t, mf, ml);
    const auto [k2f, k2l] = rhs(t + 0.5 * h, mf + 0.5 * h * k1f, ml + 0.5 * h * k1l);
    const auto [k3f, k3l] = rhs(t + 0.5 * h, mf + 0.5 * h * k2f, ml + 0.5 * h * k2l);
    const auto [k4f, k4l] = rhs(t + h, mf + h * k3f, ml + h * k3l);
    mf += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    ml += h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l);
    out.push_back({t + h, mf, ml});
  }
  return out;
}

}  // namespace tpbb
