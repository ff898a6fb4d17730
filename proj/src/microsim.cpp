#include "tpbb/microsim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "tpbb/diagnostics.hpp"
#include "tpbb/errors.hpp"

namespace tpbb {

namespace {

inline double follower_velocity(const MicroState& s, std::size_t i, const KernelTriple& k) {
  const double xi = s.x[i];
  double fsum = 0.0;
  for (double xk : s.x) fsum += interaction_velocity(k.ff, xi, xk);
  double lsum = 0.0;
  for (double yl : s.y) lsum += interaction_velocity(k.fl, xi, yl);
  return fsum / static_cast<double>(s.x.size()) + lsum / static_cast<double>(s.y.size());
}

inline double leader_interaction(const MicroState& s, std::size_t j, const KernelTriple& k) {
  const double yj = s.y[j];
  double rsum = 0.0;
  for (double yl : s.y) rsum += interaction_velocity(k.ll, yj, yl);
  return rsum / static_cast<double>(s.y.size());
}

void check_state(const MicroState& s) {
  if (s.x.empty() || s.y.empty()) throw ValidationError("micro state needs N >= 1 and M >= 1");
}

}  // namespace

MicroState micro_step(const MicroState& s, double u, double dt, const KernelTriple& k, int workers) {
  check_state(s);
  MicroState next;
  next.x.resize(s.x.size());
  next.y.resize(s.y.size());
  next.t = s.t + dt;
  const auto n = static_cast<long long>(s.x.size());
  const auto m = static_cast<long long>(s.y.size());
#pragma omp parallel num_threads(workers)
  {
#pragma omp for schedule(static) nowait
    for (long long i = 0; i < n; ++i) {
      next.x[i] = s.x[i] + dt * follower_velocity(s, static_cast<std::size_t>(i), k);
    }
#pragma omp for schedule(static)
    for (long long j = 0; j < m; ++j) {
      next.y[j] = s.y[j] + dt * (leader_interaction(s, static_cast<std::size_t>(j), k) + u);
    }
  }
  return next;
}

namespace micro::serial {

MicroState micro_step(const MicroState& s, double u, double dt, const KernelTriple& k) {
  check_state(s);
  MicroState next;
  next.t = s.t + dt;
  for (std::size_t i = 0; i < s.x.size(); ++i) next.x.push_back(s.x[i] + dt * follower_velocity(s, i, k));
  for (std::size_t j = 0; j < s.y.size(); ++j) next.y.push_back(s.y[j] + dt * (leader_interaction(s, j, k) + u));
  return next;
}

}  // namespace micro::serial

double micro_running_cost(const MicroState& s, double u, const CostParams& p) {
  double fx = 0.0;
  for (double x : s.x) fx += (x - p.reference) * (x - p.reference);
  double fy = 0.0;
  for (double y : s.y) fy += (y - p.reference) * (y - p.reference);
  return p.a_f / static_cast<double>(s.x.size()) * fx + p.a_l / static_cast<double>(s.y.size()) * fy +
         p.gamma * u * u;
}

MicroRollout simulate_micro(const MicroState& s0, const ControlSource& fb, double dt, long long n_steps,
                            const KernelTriple& k, const CostParams& p, Rng& rng,
                            FeedbackSampling sampling, bool record, int workers) {
  check_state(s0);
  if (!(dt > 0.0)) throw ValidationError("simulate_micro: dt must be > 0");
  const double beta = std::exp(-p.lambda * dt);
  const bool binary = s0.x.size() == 2 && s0.y.size() == 2;
  MicroRollout out;
  MicroState s = s0;
  if (record) out.trajectory.push_back(s);
  double weight = 1.0;
  for (long long n = 0; n < n_steps; ++n) {
    double u = 0.0;
    if (fb.kind() != ControlKind::kNone) {
      BinaryState b;
      if (binary) {
        b = {s.x[0], s.x[1], s.y[0], s.y[1]};
      } else if (sampling == FeedbackSampling::kMeans) {
        const double mx = mean_opinion(s.x);
        const double my = mean_opinion(s.y);
        b = {mx, mx, my, my};
      } else {
        b.x1 = s.x[uniform_index(rng, s.x.size())];
        b.x2 = s.x[uniform_index(rng, s.x.size())];
        b.y1 = s.y[uniform_index(rng, s.y.size())];
        b.y2 = s.y[uniform_index(rng, s.y.size())];
      }
      u = fb(b);
    }
    out.cost += weight * dt * micro_running_cost(s, u, p);
    weight *= beta;
    out.controls.push_back(u);
    s = micro_step(s, u, dt, k, workers);
    if (record) out.trajectory.push_back(s);
  }
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const MicroRollout& rollout) {
  std::ofstream out(path);
  if (!out) throw PersistFailure("cannot open '" + path.string() + "'");
  out << "t,agent_kind,agent_index,state,u_applied\n";
  char buf[128];
  for (std::size_t n = 0; n < rollout.trajectory.size(); ++n) {
    const MicroState& s = rollout.trajectory[n];
    const double u = n < rollout.controls.size() ? rollout.controls[n] : 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.10g,F,%zu,%.12g,%.12g\n", s.t, i, s.x[i], u);
      out << buf;
    }
    for (std::size_t j = 0; j < s.y.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.10g,L,%zu,%.12g,%.12g\n", s.t, j, s.y[j], u);
      out << buf;
    }
  }
  if (!out) throw PersistFailure("write to '" + path.string() + "' failed");
}

}  // namespace tpbb
