#include "tpbb/binary_dynamics.hpp"

#include "tpbb/errors.hpp"

namespace tpbb {

void CostParams::validate() const {
  if (!(a_f >= 0.0)) throw ValidationError("cost.a_f must be >= 0");
  if (!(a_l >= 0.0)) throw ValidationError("cost.a_l must be >= 0");
  if (!(gamma >= 0.0)) throw ValidationError("cost.gamma must be >= 0");
  if (!(lambda > 0.0)) throw ValidationError("cost.lambda must be > 0");
  if (!(dt > 0.0)) throw ValidationError("cost.dt must be > 0");
  if (!(u_min < u_max)) throw ValidationError("cost.u_min must be < cost.u_max");
  if (!std::isfinite(reference)) throw ValidationError("cost.reference must be finite");
}

}  // namespace tpbb
