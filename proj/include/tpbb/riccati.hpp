#pragma once

#include <algorithm>
#include <array>

#include "tpbb/binary_dynamics.hpp"
#include "tpbb/kernels.hpp"

namespace tpbb {

using Mat4 = std::array<std::array<double, 4>, 4>;

/// Affine feedback u(s) = clamp(G (s - reference) + offset, u_min, u_max) for
/// the linear binary problem.
struct RiccatiGain {
  std::array<double, 4> gain{};  // (x1, x2, y1, y2)
  double offset = 0.0;
  double reference = 0.0;
  double u_min = -1.0;
  double u_max = 1.0;
  Mat4 value_matrix{};  // V(s) = z^T P z, z = s - reference
  int iterations = 0;

  double unclamped(const BinaryState& s) const {
    return gain[0] * (s.x1 - reference) + gain[1] * (s.x2 - reference) +
           gain[2] * (s.y1 - reference) + gain[3] * (s.y2 - reference) + offset;
  }
  double operator()(const BinaryState& s) const {
    return std::clamp(unclamped(s), u_min, u_max);
  }
  double value(const BinaryState& s) const;
};

/// Discounted discrete-time LQR for the binary step with linear kernels,
/// by fixed-point iteration on the Riccati recursion (tolerance 1e-12).
/// Throws ValidationError for nonlinear kernels and NoStabilizingSolution if
/// the recursion diverges.
RiccatiGain riccati_feedback(const CostParams& p, const KernelTriple& k);

}  // namespace tpbb
