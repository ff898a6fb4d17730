#include "tpbb/kernels.hpp"

#include <cmath>
#include <sstream>

#include "tpbb/errors.hpp"

namespace tpbb {

KernelSpec KernelSpec::Constant(double c) {
  if (!std::isfinite(c)) throw ValidationError("constant kernel: c must be finite");
  return {KernelKind::kConstant, c};
}

KernelSpec KernelSpec::BoundedConfidence(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ValidationError("bounded_confidence kernel: r must be > 0");
  }
  return {KernelKind::kBoundedConfidence, radius};
}

KernelSpec KernelSpec::Parabolic(int sign) {
  if (sign != 1 && sign != -1) throw ValidationError("parabolic kernel: s must be +1 or -1");
  return {KernelKind::kParabolic, static_cast<double>(sign)};
}

std::string_view kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::kZero:
      return "zero";
    case KernelKind::kConstant:
      return "constant";
    case KernelKind::kBoundedConfidence:
      return "bounded_confidence";
    case KernelKind::kParabolic:
      return "parabolic";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "zero") return KernelKind::kZero;
  if (name == "constant") return KernelKind::kConstant;
  if (name == "bounded_confidence") return KernelKind::kBoundedConfidence;
  if (name == "parabolic") return KernelKind::kParabolic;
  throw ValidationError("unknown kernel kind '" + std::string(name) + "'");
}

std::string describe(const KernelSpec& k) {
  std::ostringstream os;
  os << kernel_kind_name(k.kind);
  switch (k.kind) {
    case KernelKind::kConstant:
      os << "(c=" << k.param << ")";
      break;
    case KernelKind::kBoundedConfidence:
      os << "(r=" << k.param << ")";
      break;
    case KernelKind::kParabolic:
      os << "(s=" << (k.param > 0 ? "+1" : "-1") << ")";
      break;
    case KernelKind::kZero:
      break;
  }
  return os.str();
}

}  // namespace tpbb
