#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "tpbb/binary_dynamics.hpp"

namespace tpbb {

/// Binned density over [lo, hi]; heights integrate to `mass`.
struct DensityHistogram {
  double lo = -1.0;
  double hi = 1.0;
  double dx = 0.025;
  double mass = 1.0;
  std::vector<double> heights;

  double center(std::size_t bin) const { return lo + (static_cast<double>(bin) + 0.5) * dx; }
  std::size_t bins() const { return heights.size(); }
};

/// Counts per bin scaled by mass / (n dx). Samples outside [lo, hi] land in
/// the nearest boundary bin. Throws EmptySampleSet and ValidationError.
DensityHistogram histogram(std::span<const double> samples, double dx, double mass,
                           double lo = -1.0, double hi = 1.0);

/// Throws EmptySampleSet.
double mean_opinion(std::span<const double> samples);

/// e^{-lambda t} dt [a_F avg((x - ref)^2) + a_L avg((y - ref)^2) + gamma mean_u_sq]
double cost_increment(double t, double dt, std::span<const double> followers,
                      std::span<const double> leaders, double mean_u_sq, const CostParams& p);

/// Running discounted cost of a particle run.
class CostAccumulator {
 public:
  explicit CostAccumulator(CostParams p) : params_(p) {}
  void add(double t, double dt, std::span<const double> followers, std::span<const double> leaders,
           double mean_u_sq) {
    total_ += cost_increment(t, dt, followers, leaders, mean_u_sq, params_);
  }
  double total() const { return total_; }

 private:
  CostParams params_;
  double total_ = 0.0;
};

struct MomentPoint {
  double t;
  double mean_f;
  double mean_l;
};

/// First-moment system of the linear model with mass-weighted interactions:
///   m_F' = rho_L (m_L - m_F),   m_L' = drift(t),
/// integrated with classical RK4. `drift` is the mean control velocity of the
/// leader population (for particle runs, 2 rho_L times the mean of phi).
/// The returned points include t = 0 and t = final_time.
std::vector<MomentPoint> linear_moment_odes(double mean_f0, double mean_l0, double rho_f,
                                            double rho_l, const std::function<double(double)>& drift,
                                            double final_time, double dt_ode);

}  // namespace tpbb
