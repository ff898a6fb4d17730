#pragma once

#include <algorithm>
#include <cmath>

namespace tpbb::detail {

// Candidates must be offered in ControlGrid::search_order(); a later
// candidate replaces the incumbent only if it is better by more than a
// relative 1e-12.
class ArgminTracker {
 public:
  void offer(double value, double control) {
    if (first_ || value < best_ - 1e-12 * std::max(1.0, std::abs(best_))) {
      best_ = value;
      control_ = control;
      first_ = false;
    }
  }
  double value() const { return best_; }
  double control() const { return control_; }

 private:
  bool first_ = true;
  double best_ = 0.0;
  double control_ = 0.0;
};

}  // namespace tpbb::detail
