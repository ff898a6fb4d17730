#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tpbb {

enum class KernelKind : std::uint32_t {
  kZero = 0,
  kConstant = 1,
  kBoundedConfidence = 2,
  kParabolic = 3,
};

/// Closed descriptor of a binary interaction kernel K(x, y).
///
/// `param` holds the rate c (Constant), the confidence radius r
/// (BoundedConfidence) or the sign s = +-1 (Parabolic); it is unused for Zero.
/// Use the named constructors, which enforce the per-variant invariants.
struct KernelSpec {
  KernelKind kind = KernelKind::kZero;
  double param = 0.0;

  static KernelSpec Zero() { return {}; }
  static KernelSpec Constant(double c);
  static KernelSpec BoundedConfidence(double radius);
  static KernelSpec Parabolic(int sign);

  bool is_linear() const {
    return kind == KernelKind::kZero || kind == KernelKind::kConstant;
  }
  /// Rate of a linear kernel (0 for Zero). Only meaningful if is_linear().
  double linear_rate() const { return kind == KernelKind::kConstant ? param : 0.0; }

  bool operator==(const KernelSpec&) const = default;
};

/// Kernels for follower-follower, follower-leader and leader-leader pairs.
struct KernelTriple {
  KernelSpec ff;
  KernelSpec fl;
  KernelSpec ll;

  bool all_linear() const { return ff.is_linear() && fl.is_linear() && ll.is_linear(); }
  bool operator==(const KernelTriple&) const = default;
};

// Parabolic kernels depend only on the evaluating agent's own state x.
inline double eval_kernel(const KernelSpec& k, double x, double y) {
  switch (k.kind) {
    case KernelKind::kZero:
      return 0.0;
    case KernelKind::kConstant:
      return k.param;
    case KernelKind::kBoundedConfidence: {
      const double d = x - y;
      return (d <= k.param && -d <= k.param) ? 1.0 : 0.0;
    }
    case KernelKind::kParabolic:
      return k.param * (1.0 - x * x);
  }
  return 0.0;
}

/// K(x, y) * (y - x): the velocity induced on an agent at x by a partner at y.
inline double interaction_velocity(const KernelSpec& k, double x, double y) {
  return eval_kernel(k, x, y) * (y - x);
}

std::string_view kernel_kind_name(KernelKind kind);
/// Throws ValidationError for unknown names.
KernelKind parse_kernel_kind(std::string_view name);
std::string describe(const KernelSpec& k);

}  // namespace tpbb
