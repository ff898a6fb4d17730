#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tpbb/binary_dynamics.hpp"
#include "tpbb/control_source.hpp"
#include "tpbb/diagnostics.hpp"
#include "tpbb/kernels.hpp"
#include "tpbb/rng.hpp"

namespace tpbb {

/// Follower and leader samples of the two densities.
struct ParticleEnsemble {
  std::vector<double> followers;
  std::vector<double> leaders;
  double rho_f = 1.0;
  double rho_l = 0.5;
  double t = 0.0;
};

enum class PhiEstimatorKind {
  kFullDoubleSum,    // (1/sigma^2) sum_h sum_k F(x_h, x_k, y_i, y_r)
  kSubsampledPairs,  // (1/sigma) sum_h F(x_h, x_{h+1 mod sigma}, y_i, y_r)
};

struct ScalingParams {
  double epsilon = 0.01;
  double dt = 2.0 / 3.0 * 1e-2;
  double final_time = 2.5;
  int control_samples = 64;
  PhiEstimatorKind estimator = PhiEstimatorKind::kFullDoubleSum;
  bool symmetric_collisions = false;

  /// Interaction strength alpha = epsilon.
  double alpha() const { return epsilon; }
  /// Number of steps N_T with N_T dt = final_time; throws ValidationError if
  /// final_time is not an integer multiple of dt.
  long long steps() const;
  /// Checks positivity and dt <= epsilon / (rho_f + rho_l).
  void validate(double rho_f, double rho_l) const;
};

inline double ff_collision(double x_i, double x_r, double alpha, const KernelSpec& k_ff) {
  return x_i + alpha * interaction_velocity(k_ff, x_i, x_r);
}

/// The leader sample is left unchanged.
inline double fl_collision(double x_j, double y_r, double alpha, const KernelSpec& k_fl) {
  return x_j + alpha * interaction_velocity(k_fl, x_j, y_r);
}

inline double ll_collision(double y_i, double y_r, double alpha, const KernelSpec& k_ll, double phi) {
  return y_i + alpha * interaction_velocity(k_ll, y_i, y_r) + 2.0 * alpha * phi;
}

/// Averages the binary feedback over follower samples for a leader pair.
///
/// For tabulated grid feedback the full double sum factorizes: with hat
/// weights w_a(x) of the multilinear interpolant,
///   sum_h sum_k F(x_h, x_k, y1, y2) = sum_{a,b} p_a p_b F_ab(y1, y2),
/// p_a = sum_h w_a(x_h), so the sum is evaluated exactly in O(sigma + n^4)
/// once per step instead of O(sigma^2) per leader collision.
class PhiEstimator {
 public:
  PhiEstimator(const ControlSource& fb, std::vector<double> samples, PhiEstimatorKind kind);

  double operator()(double y_i, double y_r) const;
  std::span<const double> samples() const { return samples_; }

 private:
  const ControlSource* fb_;
  std::vector<double> samples_;
  PhiEstimatorKind kind_;
  std::vector<double> table_;  // factorized (y1, y2) table, tabulated sources only
};

/// Draws `count` follower samples with repetition. Throws EmptyFollowerSet.
std::vector<double> draw_control_samples(std::span<const double> followers, int count, Rng& rng);

/// Draws sigma_s follower samples and returns the full double average.
/// Throws EmptyFollowerSet; fb must not be None.
double estimate_phi(std::span<const double> followers, double y_i, double y_r, int sigma_s,
                    const ControlSource& fb, Rng& rng);

struct StepStats {
  long long n_ff = 0;
  long long n_fl = 0;
  long long m_ll = 0;
  double phi_sum = 0.0;
  double phi_sq_sum = 0.0;

  double phi_mean() const { return m_ll > 0 ? phi_sum / static_cast<double>(m_ll) : 0.0; }
  double phi_sq_mean() const { return m_ll > 0 ? phi_sq_sum / static_cast<double>(m_ll) : 0.0; }
};

/// Agents and partners chosen for one step. In symmetric mode selected agents
/// are paired with each other, which updates both members of a pair.
struct CollisionPlan {
  std::vector<std::size_t> ff_agents, ff_partners;
  std::vector<std::size_t> fl_agents, fl_partners;
  std::vector<std::size_t> ll_agents, ll_partners;
  std::vector<double> control_samples;  // shared by every leader collision
};

/// Draws every random choice of one step (counts, selections, partners and,
/// if `controlled`, the control samples) from `rng`, serially and in a fixed
/// order. Throws InfeasibleCounts.
CollisionPlan plan_collisions(const ParticleEnsemble& e, const ScalingParams& sp, bool controlled,
                              Rng& rng);

/// One step of the two-population Boltzmann-Bellman scheme. Random draws are
/// serial; collision updates run on `workers` OpenMP threads and do not
/// depend on the thread count. Throws InfeasibleCounts.
ParticleEnsemble tpbb_step(const ParticleEnsemble& e, const ScalingParams& sp,
                           const KernelTriple& k, const ControlSource& fb, Rng& rng,
                           StepStats* stats = nullptr, int workers = 1);

namespace dsmc {

/// next[i] updated for planned followers only; others must be pre-copied.
void apply_follower_collisions(const CollisionPlan& plan, std::span<const double> followers,
                               std::span<const double> leaders, double alpha, const KernelTriple& k,
                               std::span<double> next, int workers);

/// phi_out[m] receives the control applied to plan.ll_agents[m].
void apply_leader_collisions(const CollisionPlan& plan, std::span<const double> leaders, double alpha,
                             const KernelTriple& k, const PhiEstimator* phi, std::span<double> next,
                             std::span<double> phi_out, int workers);

namespace serial {

void apply_follower_collisions(const CollisionPlan& plan, std::span<const double> followers,
                               std::span<const double> leaders, double alpha, const KernelTriple& k,
                               std::span<double> next);

void apply_leader_collisions(const CollisionPlan& plan, std::span<const double> leaders, double alpha,
                             const KernelTriple& k, const PhiEstimator* phi, std::span<double> next,
                             std::span<double> phi_out);

}  // namespace serial
}  // namespace dsmc

struct Interval {
  double lo;
  double hi;
  bool operator==(const Interval&) const = default;
};

/// Everything needed for a particle run besides the control source.
struct SimulationSetup {
  KernelTriple kernels;
  CostParams cost;
  ScalingParams scaling;
  double rho_f = 1.0;
  double rho_l = 0.5;
  std::size_t n_followers = 10000;
  std::size_t n_leaders = 5000;
  Interval followers_init{-1.0, 1.0};
  Interval leaders_init{-1.0, 1.0};
  double dx = 0.025;
  double domain_lo = -1.0;
  double domain_hi = 1.0;
  int stride = 15;
  int surface_points = 41;
  int workers = 1;
};

struct Snapshot {
  double t = 0.0;
  DensityHistogram followers;
  DensityHistogram leaders;
  std::vector<double> surface_y;
  std::vector<double> surface_phi;
};

struct ScalarRow {
  double t;
  double mean_f;
  double mean_l;
  double cost;
};

struct ControlRow {
  double t;
  long long n_ff;
  long long n_fl;
  long long m_ll;
  double phi_mean;
  double phi_sq_mean;
};

struct RunRecord {
  std::vector<Snapshot> snapshots;   // every `stride` steps plus the final time
  std::vector<ScalarRow> scalars;    // every step, t_0 .. t_{N_T}
  std::vector<ControlRow> controls;  // one row per step
  ParticleEnsemble final_state;
};

/// Control surface Phi(y) on a uniform grid of `points` nodes over
/// [lo, hi]: phi(y, y_r) averaged over a strided subsample of leaders, with
/// phi built from a strided subsample of `sigma` followers.
void control_surface(const ControlSource& fb, const ParticleEnsemble& e, int sigma,
                     PhiEstimatorKind kind, int points, double lo, double hi,
                     std::vector<double>& y, std::vector<double>& phi);

/// Samples the initial data and runs N_T steps, recording diagnostics.
RunRecord run_tpbb(const SimulationSetup& setup, const ControlSource& fb, Rng& rng);

}  // namespace tpbb
