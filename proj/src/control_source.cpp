#include "tpbb/control_source.hpp"

#include "tpbb/errors.hpp"

namespace tpbb {

ControlSource ControlSource::grid(std::shared_ptr<const ValueGrid> grid, GridEvaluation mode,
                                  std::vector<double> policy, int workers) {
  if (!grid) throw ValidationError("grid feedback needs a value grid");
  ControlSource cs;
  cs.kind_ = ControlKind::kGridFeedback;
  cs.evaluation_ = mode;
  cs.controls_ = ControlGrid::for_setup(grid->setup);
  if (policy.empty()) {
    policy = tabulate_policy(*grid, *cs.controls_, workers);
  } else if (policy.size() != grid->values.size()) {
    throw ValidationError("tabulated policy does not match the value grid");
  }
  cs.policy_ = std::move(policy);
  cs.grid_ = std::move(grid);
  return cs;
}

ControlSource ControlSource::riccati(const RiccatiGain& gain) {
  ControlSource cs;
  cs.kind_ = ControlKind::kRiccati;
  cs.gain_ = gain;
  return cs;
}

double ControlSource::operator()(const BinaryState& s) const {
  switch (kind_) {
    case ControlKind::kNone:
      return 0.0;
    case ControlKind::kRiccati:
      return gain_(s);
    case ControlKind::kGridFeedback:
      if (evaluation_ == GridEvaluation::kTabulated) {
        return interpolate(policy_, grid_->setup.geometry, s);
      }
      return feedback(*grid_, s, *controls_, grid_->setup.cost, grid_->setup.kernels);
  }
  return 0.0;
}

}  // namespace tpbb
