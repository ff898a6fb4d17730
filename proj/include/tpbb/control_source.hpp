#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tpbb/binary_dynamics.hpp"
#include "tpbb/dp_solver.hpp"
#include "tpbb/riccati.hpp"
#include "tpbb/value_grid.hpp"

namespace tpbb {

enum class ControlKind { kNone, kGridFeedback, kRiccati };

/// How a grid feedback is evaluated off the grid nodes.
enum class GridEvaluation {
  kTabulated,  // multilinear interpolation of the argmin tabulated at the nodes
  kArgmin,     // the argmin of the Bellman right-hand side at the query state
};

/// The binary feedback map F(x1, x2, y1, y2) handed to particle simulations.
class ControlSource {
 public:
  static ControlSource none() { return ControlSource(); }
  /// `policy` may be supplied when already known (e.g. from the solver);
  /// otherwise it is tabulated from `grid`.
  static ControlSource grid(std::shared_ptr<const ValueGrid> grid, GridEvaluation mode,
                            std::vector<double> policy = {}, int workers = 1);
  static ControlSource riccati(const RiccatiGain& gain);

  ControlKind kind() const { return kind_; }
  GridEvaluation evaluation() const { return evaluation_; }
  bool is_tabulated() const { return kind_ == ControlKind::kGridFeedback && evaluation_ == GridEvaluation::kTabulated; }

  double operator()(const BinaryState& s) const;

  /// Only for grid sources.
  const ValueGrid& value_grid() const { return *grid_; }
  std::span<const double> policy() const { return policy_; }

 private:
  ControlSource() = default;

  ControlKind kind_ = ControlKind::kNone;
  GridEvaluation evaluation_ = GridEvaluation::kTabulated;
  std::shared_ptr<const ValueGrid> grid_;
  std::optional<ControlGrid> controls_;
  std::vector<double> policy_;
  RiccatiGain gain_;
};

}  // namespace tpbb
