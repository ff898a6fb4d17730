#pragma once

#include <span>
#include <vector>

#include "tpbb/dp_solver.hpp"
#include "tpbb/value_grid.hpp"

// Grid-wide Bellman kernels. The functions in tpbb::dp are OpenMP-parallel;
// tpbb::dp::serial holds the node-by-node reference built on bellman_update,
// kept for testing and benchmarking. Both produce bit-identical output.
namespace tpbb::dp {

struct SweepProblem {
  SweepProblem(const DpSetup& setup, const ControlGrid& cg);

  DpSetup setup;
  ControlGrid control_grid;
  std::vector<double> controls;  // search order
  double beta;
};

/// out[i] = min_u {beta V(step(s_i, u)) + dt l(s_i, u)}, policy[i] = argmin.
void bellman_sweep(const SweepProblem& prob, std::span<const double> v, std::span<double> out,
                   std::span<double> policy, int workers);

/// out[i] = beta V(step(s_i, pi_i)), plus dt l(s_i, pi_i) when with_cost.
void policy_sweep(const SweepProblem& prob, std::span<const double> policy,
                  std::span<const double> v, std::span<double> out, bool with_cost, int workers);

namespace serial {

void bellman_sweep(const SweepProblem& prob, std::span<const double> v, std::span<double> out,
                   std::span<double> policy);

void policy_sweep(const SweepProblem& prob, std::span<const double> policy,
                  std::span<const double> v, std::span<double> out, bool with_cost);

}  // namespace serial

/// Deterministic blocked sup-norm of a - b.
double sup_distance(std::span<const double> a, std::span<const double> b);

}  // namespace tpbb::dp
