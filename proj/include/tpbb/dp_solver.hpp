#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tpbb/binary_dynamics.hpp"
#include "tpbb/kernels.hpp"
#include "tpbb/value_grid.hpp"

namespace tpbb {

/// Uniform samples of U = [u_min, u_max]. The node count is odd so that
/// u = 0 is a node whenever the interval is symmetric.
class ControlGrid {
 public:
  ControlGrid(double u_min, double u_max, int nodes);
  static ControlGrid for_setup(const DpSetup& setup) {
    return ControlGrid(setup.cost.u_min, setup.cost.u_max, setup.control_nodes);
  }

  /// Ascending node values.
  std::span<const double> values() const { return values_; }
  /// Nodes sorted by |u|, then u: the order in which ties are resolved.
  std::span<const double> search_order() const { return order_; }
  double spacing() const { return spacing_; }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  std::vector<double> values_;
  std::vector<double> order_;
  double spacing_;
};

struct BellmanChoice {
  double value;
  double control;
};

/// min over the control grid of beta * V(step(s, u)) + dt * l(s, u), and the
/// minimizer. Candidates within a relative 1e-12 of the incumbent count as
/// ties and resolve to the smallest |u|, then the smallest u.
BellmanChoice bellman_update(const ValueGrid& v, const BinaryState& s, const ControlGrid& cg,
                             const CostParams& p, const KernelTriple& k);

/// The feedback map F(x1, x2, y1, y2): the argmin of bellman_update at s.
inline double feedback(const ValueGrid& v, const BinaryState& s, const ControlGrid& cg,
                       const CostParams& p, const KernelTriple& k) {
  return bellman_update(v, s, cg, p, k).control;
}

struct SolveOptions {
  double tol = 1e-6;
  int max_iter = 1000;
  int workers = 1;
  /// Called after each iteration with (iteration, residual).
  std::function<void(int, double)> progress;
};

struct DpResult {
  ValueGrid grid;
  /// Minimizing control at every node of the returned grid.
  std::vector<double> policy;
  /// Value iteration: ||V_{k+1} - V_k||_inf per sweep. Policy iteration:
  /// Bellman residual ||T V - V||_inf after each policy evaluation.
  std::vector<double> residual_log;
  /// Total passes over the grid, including policy-evaluation products.
  long long grid_passes = 0;
};

/// Jacobi value iteration. Never throws on non-convergence; check
/// result.grid.diagnostics.converged.
DpResult value_iteration(ValueGrid v0, const ControlGrid& cg, const SolveOptions& opts);

/// Policy iteration: each frozen policy is evaluated by solving
/// (I - beta P_pi) V = c with BiCGSTAB, then improved by a Bellman sweep.
DpResult policy_iteration(ValueGrid v0, const ControlGrid& cg, const SolveOptions& opts);

/// Argmin control at every grid node of v.
std::vector<double> tabulate_policy(const ValueGrid& v, const ControlGrid& cg, int workers = 1);

}  // namespace tpbb
