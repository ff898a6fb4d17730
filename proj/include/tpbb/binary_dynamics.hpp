#pragma once

#include <cmath>

#include "tpbb/kernels.hpp"

namespace tpbb {

/// State of the reduced problem: two followers and two leaders.
struct BinaryState {
  double x1 = 0.0;
  double x2 = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;

  bool operator==(const BinaryState&) const = default;
};

/// Running-cost weights, discount and control bounds of the binary problem.
struct CostParams {
  double a_f = 1.0;        // follower deviation weight
  double a_l = 1.0;        // leader deviation weight
  double gamma = 1.0;      // control energy weight
  double lambda = 1.0;     // discount rate
  double reference = 0.0;  // target consensus state
  double dt = 0.02;        // DP time step
  double u_min = -1.0;
  double u_max = 1.0;

  double discount() const { return std::exp(-lambda * dt); }

  /// Throws ValidationError naming the first offending field.
  void validate() const;

  bool operator==(const CostParams&) const = default;
};

// The association of the floating-point operations is shared with the
// N-agent update so that both agree bit for bit at N = M = 2.
inline BinaryState binary_step(const BinaryState& s, double u, double dt,
                               const KernelTriple& k) {
  BinaryState next;
  const double f1 = interaction_velocity(k.ff, s.x1, s.x2);
  const double l1 = interaction_velocity(k.fl, s.x1, s.y1) + interaction_velocity(k.fl, s.x1, s.y2);
  const double f2 = interaction_velocity(k.ff, s.x2, s.x1);
  const double l2 = interaction_velocity(k.fl, s.x2, s.y1) + interaction_velocity(k.fl, s.x2, s.y2);
  next.x1 = s.x1 + dt * (0.5 * f1 + 0.5 * l1);
  next.x2 = s.x2 + dt * (0.5 * f2 + 0.5 * l2);
  next.y1 = s.y1 + dt * (0.5 * interaction_velocity(k.ll, s.y1, s.y2) + u);
  next.y2 = s.y2 + dt * (0.5 * interaction_velocity(k.ll, s.y2, s.y1) + u);
  return next;
}

/// State part of the running cost, without the control term.
inline double state_cost(const BinaryState& s, const CostParams& p) {
  const double dx1 = s.x1 - p.reference;
  const double dx2 = s.x2 - p.reference;
  const double dy1 = s.y1 - p.reference;
  const double dy2 = s.y2 - p.reference;
  return 0.5 * p.a_f * (dx1 * dx1 + dx2 * dx2) + 0.5 * p.a_l * (dy1 * dy1 + dy2 * dy2);
}

inline double running_cost(const BinaryState& s, double u, const CostParams& p) {
  return state_cost(s, p) + p.gamma * u * u;
}

}  // namespace tpbb
