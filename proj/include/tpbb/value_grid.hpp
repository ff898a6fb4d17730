#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "tpbb/binary_dynamics.hpp"
#include "tpbb/kernels.hpp"

namespace tpbb {

/// Uniform tensor grid over [lo, hi]^4 with the same node count on every axis.
struct GridGeometry {
  int nodes = 41;
  double lo = -1.0;
  double hi = 1.0;

  double spacing() const { return (hi - lo) / (nodes - 1); }
  double coord(std::size_t i) const { return lo + static_cast<double>(i) * spacing(); }
  std::size_t size() const {
    const auto n = static_cast<std::size_t>(nodes);
    return n * n * n * n;
  }
  /// Row-major index, x1 slowest and y2 fastest.
  std::size_t index(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) const {
    const auto n = static_cast<std::size_t>(nodes);
    return ((i1 * n + i2) * n + j1) * n + j2;
  }
  void validate() const;

  bool operator==(const GridGeometry&) const = default;
};

/// Lower node index along one axis and the weight of the upper node.
struct AxisStencil {
  std::size_t index;
  double weight;
};

/// Precomputed 1-D locator. Coordinates are clamped into [lo, hi]; values
/// within 1e-9 cells of a node snap to it so node evaluations are exact.
class AxisLocator {
 public:
  explicit AxisLocator(const GridGeometry& g)
      : lo_(g.lo), hi_(g.hi), inv_h_(1.0 / g.spacing()), last_(static_cast<std::size_t>(g.nodes - 1)) {}

  AxisStencil operator()(double v) const {
    const double t = (std::clamp(v, lo_, hi_) - lo_) * inv_h_;
    const double r = std::nearbyint(t);
    if (std::abs(t - r) < 1e-9) {
      const auto i = static_cast<std::size_t>(r);
      if (i >= last_) return {last_ - 1, 1.0};
      return {i, 0.0};
    }
    auto i = static_cast<std::size_t>(t);
    if (i >= last_) i = last_ - 1;
    return {i, t - static_cast<double>(i)};
  }

 private:
  double lo_;
  double hi_;
  double inv_h_;
  std::size_t last_;
};

/// 4-linear interpolation of `field` (laid out per GridGeometry::index).
inline double interpolate_stencils(std::span<const double> field, std::size_t n,
                                   const AxisStencil& s1, const AxisStencil& s2,
                                   const AxisStencil& s3, const AxisStencil& s4) {
  const double w1[2] = {1.0 - s1.weight, s1.weight};
  const double w2[2] = {1.0 - s2.weight, s2.weight};
  const double w3[2] = {1.0 - s3.weight, s3.weight};
  const double w4[2] = {1.0 - s4.weight, s4.weight};
  double acc = 0.0;
  for (int a = 0; a < 2; ++a) {
    if (w1[a] == 0.0) continue;
    for (int b = 0; b < 2; ++b) {
      const double wab = w1[a] * w2[b];
      if (wab == 0.0) continue;
      const std::size_t base = ((s1.index + a) * n + (s2.index + b)) * n;
      double inner = 0.0;
      for (int c = 0; c < 2; ++c) {
        if (w3[c] == 0.0) continue;
        const double* row = field.data() + (base + s3.index + c) * n + s4.index;
        double r = 0.0;
        if (w4[0] != 0.0) r += w4[0] * row[0];
        if (w4[1] != 0.0) r += w4[1] * row[1];
        inner += w3[c] * r;
      }
      acc += wab * inner;
    }
  }
  return acc;
}

double interpolate(std::span<const double> field, const GridGeometry& g, const BinaryState& s);

/// Everything that determines the discrete Bellman problem.
struct DpSetup {
  GridGeometry geometry;
  CostParams cost;
  KernelTriple kernels;
  int control_nodes = 41;

  void validate() const;
  bool operator==(const DpSetup&) const = default;
};

struct SolverDiagnostics {
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Samples of the value function V(x1, x2, y1, y2) on the DP grid.
struct ValueGrid {
  DpSetup setup;
  std::vector<double> values;
  SolverDiagnostics diagnostics;

  static ValueGrid zeros(const DpSetup& setup);
  const GridGeometry& geometry() const { return setup.geometry; }
};

/// Multilinear interpolation of V; coordinates outside the grid are clamped.
inline double interpolate_value(const ValueGrid& v, const BinaryState& s) {
  return interpolate(v.values, v.setup.geometry, s);
}

/// Little-endian binary persistence. Throws PersistFailure on I/O or format
/// errors.
void save_value_grid(const std::filesystem::path& path, const ValueGrid& grid);
ValueGrid load_value_grid(const std::filesystem::path& path);

/// Throws ValidationError if the grid was built for a different problem.
void check_compatible(const ValueGrid& grid, const DpSetup& expected);

}  // namespace tpbb
