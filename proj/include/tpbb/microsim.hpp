#pragma once

#include <filesystem>
#include <vector>

#include "tpbb/binary_dynamics.hpp"
#include "tpbb/control_source.hpp"
#include "tpbb/kernels.hpp"
#include "tpbb/rng.hpp"

namespace tpbb {

/// N followers and M leaders of the agent-based system.
struct MicroState {
  std::vector<double> x;
  std::vector<double> y;
  double t = 0.0;
};

/// Forward Euler step of the N + M agent system with a broadcast control u.
/// Self-interaction terms are kept in the sums (they vanish), so the 1/N and
/// 1/M normalizations apply as written. At N = M = 2 the result equals
/// binary_step bit for bit.
MicroState micro_step(const MicroState& s, double u, double dt, const KernelTriple& k,
                      int workers = 1);

namespace micro::serial {
MicroState micro_step(const MicroState& s, double u, double dt, const KernelTriple& k);
}

/// How the binary feedback is fed from an N + M state.
enum class FeedbackSampling {
  kRandomPairs,  // two random followers and two random leaders per step
  kMeans,        // (mean x, mean x, mean y, mean y)
};

struct MicroRollout {
  std::vector<MicroState> trajectory;  // n_steps + 1 states when recorded
  std::vector<double> controls;        // u_n applied at step n
  double cost = 0.0;                   // sum beta^n dt l(x^n, y^n, u^n)
};

/// Running cost a_F/N |x - ref|^2 + a_L/M |y - ref|^2 + gamma u^2.
double micro_running_cost(const MicroState& s, double u, const CostParams& p);

/// Rolls out micro_step under feedback `fb`. At N = M = 2 the feedback is
/// evaluated on the state itself; otherwise according to `sampling`.
MicroRollout simulate_micro(const MicroState& s0, const ControlSource& fb, double dt, long long n_steps,
                            const KernelTriple& k, const CostParams& p, Rng& rng,
                            FeedbackSampling sampling = FeedbackSampling::kRandomPairs,
                            bool record = true, int workers = 1);

/// CSV with columns t, agent_kind, agent_index, state, u_applied.
void write_trajectory_csv(const std::filesystem::path& path, const MicroRollout& rollout);

}  // namespace tpbb
