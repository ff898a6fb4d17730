#include "tpbb/dsmc.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "tpbb/errors.hpp"

namespace tpbb {

long long ScalingParams::steps() const {
  const double ratio = final_time / dt;
  const long long n = std::llround(ratio);
  if (n < 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
    throw ValidationError("scaling.final_time must be an integer multiple of scaling.dt");
  }
  return n;
}

void ScalingParams::validate(double rho_f, double rho_l) const {
  if (!(epsilon > 0.0)) throw ValidationError("scaling.epsilon must be > 0");
  if (!(dt > 0.0)) throw ValidationError("scaling.dt must be > 0");
  if (!(final_time >= 0.0)) throw ValidationError("scaling.final_time must be >= 0");
  if (control_samples < 1) throw ValidationError("scaling.control_samples must be >= 1");
  if (!(rho_f > 0.0) || !(rho_l > 0.0)) throw ValidationError("populations: masses must be > 0");
  const double bound = epsilon / (rho_f + rho_l);
  if (dt > bound * (1.0 + 1e-12)) {
    throw ValidationError("CFL violated: scaling.dt = " + std::to_string(dt) +
                          " exceeds epsilon/(rho_f+rho_l) = " + std::to_string(bound));
  }
  steps();
}

PhiEstimator::PhiEstimator(const ControlSource& fb, std::vector<double> samples,
                           PhiEstimatorKind kind)
    : fb_(&fb), samples_(std::move(samples)), kind_(kind) {
  if (fb.kind() == ControlKind::kNone) return;
  if (samples_.empty()) throw EmptyFollowerSet("phi estimator: no follower samples");
  if (!(fb.is_tabulated() && kind_ == PhiEstimatorKind::kFullDoubleSum)) return;

  const GridGeometry& g = fb.value_grid().setup.geometry;
  const auto n = static_cast<std::size_t>(g.nodes);
  const AxisLocator loc(g);
  std::vector<double> hat(n, 0.0);
  for (double x : samples_) {
    const AxisStencil s = loc(x);
    hat[s.index] += 1.0 - s.weight;
    hat[s.index + 1] += s.weight;
  }
  const double inv = 1.0 / static_cast<double>(samples_.size());
  for (auto& w : hat) w *= inv;

  const auto policy = fb.policy();
  table_.assign(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    if (hat[a] == 0.0) continue;
    for (std::size_t b = 0; b < n; ++b) {
      const double wab = hat[a] * hat[b];
      if (wab == 0.0) continue;
      const double* block = policy.data() + (a * n + b) * n * n;
      for (std::size_t cd = 0; cd < n * n; ++cd) table_[cd] += wab * block[cd];
    }
  }
}

double PhiEstimator::operator()(double y_i, double y_r) const {
  const ControlSource& fb = *fb_;
  if (fb.kind() == ControlKind::kNone) return 0.0;
  if (!table_.empty()) {
    const GridGeometry& g = fb.value_grid().setup.geometry;
    const auto n = static_cast<std::size_t>(g.nodes);
    const AxisLocator loc(g);
    const AxisStencil s1 = loc(y_i);
    const AxisStencil s2 = loc(y_r);
    const double* row0 = table_.data() + s1.index * n + s2.index;
    const double* row1 = row0 + n;
    const double a = 1.0 - s2.weight;
    const double acc = (1.0 - s1.weight) * (a * row0[0] + s2.weight * row0[1]) +
                       s1.weight * (a * row1[0] + s2.weight * row1[1]);
    return acc;
  }
  const std::size_t m = samples_.size();
  double acc = 0.0;
  if (kind_ == PhiEstimatorKind::kSubsampledPairs) {
    for (std::size_t h = 0; h < m; ++h) {
      acc += fb({samples_[h], samples_[(h + 1) % m], y_i, y_r});
    }
    return acc / static_cast<double>(m);
  }
  for (std::size_t h = 0; h < m; ++h) {
    double row = 0.0;
    for (std::size_t k = 0; k < m; ++k) row += fb({samples_[h], samples_[k], y_i, y_r});
    acc += row;
  }
  return acc / (static_cast<double>(m) * static_cast<double>(m));
}

std::vector<double> draw_control_samples(std::span<const double> followers, int count, Rng& rng) {
  if (followers.empty()) throw EmptyFollowerSet("cannot draw control samples: no followers");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& x : out) x = followers[uniform_index(rng, followers.size())];
  return out;
}

double estimate_phi(std::span<const double> followers, double y_i, double y_r, int sigma_s,
                    const ControlSource& fb, Rng& rng) {
  if (sigma_s < 1) throw ValidationError("estimate_phi: sigma_s must be >= 1");
  if (fb.kind() == ControlKind::kNone) throw ValidationError("estimate_phi: no control source");
  const PhiEstimator phi(fb, draw_control_samples(followers, sigma_s, rng),
                         PhiEstimatorKind::kFullDoubleSum);
  return phi(y_i, y_r);
}

namespace {

std::vector<std::size_t> identity(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// Partners for `agents`: random with repetition over [0, pool), or the
// paired selected agents in symmetric mode.
std::vector<std::size_t> draw_partners(const std::vector<std::size_t>& agents, std::size_t pool,
                                       bool symmetric, Rng& rng) {
  std::vector<std::size_t> partners(agents.size());
  std::size_t first_random = 0;
  if (symmetric) {
    const std::size_t paired = agents.size() - agents.size() % 2;
    for (std::size_t m = 0; m < paired; m += 2) {
      partners[m] = agents[m + 1];
      partners[m + 1] = agents[m];
    }
    first_random = paired;
  }
  for (std::size_t m = first_random; m < agents.size(); ++m) partners[m] = uniform_index(rng, pool);
  return partners;
}

}  // namespace

CollisionPlan plan_collisions(const ParticleEnsemble& e, const ScalingParams& sp, bool controlled,
                              Rng& rng) {
  const std::size_t ns = e.followers.size();
  const std::size_t ms = e.leaders.size();
  const double rate_f = sp.dt * e.rho_f / sp.epsilon;
  const double rate_l = sp.dt * e.rho_l / sp.epsilon;
  CollisionPlan plan;

  const auto [n_ff, n_fl] =
      stochastic_round_pair(rate_f * static_cast<double>(ns), rate_l * static_cast<double>(ns), rng);
  if (static_cast<std::size_t>(n_ff + n_fl) > ns) {
    throw InfeasibleCounts("follower collisions " + std::to_string(n_ff) + " + " +
                           std::to_string(n_fl) + " exceed N_s = " + std::to_string(ns));
  }
  if (n_fl > 0 && ms == 0) throw InfeasibleCounts("follower-leader collisions without leaders");
  auto order = identity(ns);
  partial_shuffle(order, static_cast<std::size_t>(n_ff + n_fl), rng);
  plan.ff_agents.assign(order.begin(), order.begin() + n_ff);
  plan.fl_agents.assign(order.begin() + n_ff, order.begin() + n_ff + n_fl);
  plan.ff_partners = draw_partners(plan.ff_agents, ns, sp.symmetric_collisions, rng);
  plan.fl_partners = draw_partners(plan.fl_agents, ms, false, rng);

  if (controlled && ms > 0) {
    plan.control_samples = draw_control_samples(e.followers, sp.control_samples, rng);
  }
  const long long m_ll = stochastic_round(rate_l * static_cast<double>(ms), rng);
  if (static_cast<std::size_t>(m_ll) > ms) {
    throw InfeasibleCounts("leader collisions " + std::to_string(m_ll) + " exceed M_s = " +
                           std::to_string(ms));
  }
  auto lorder = identity(ms);
  partial_shuffle(lorder, static_cast<std::size_t>(m_ll), rng);
  plan.ll_agents.assign(lorder.begin(), lorder.begin() + m_ll);
  plan.ll_partners = draw_partners(plan.ll_agents, ms, sp.symmetric_collisions, rng);
  return plan;
}

namespace dsmc {

void apply_follower_collisions(const CollisionPlan& plan, std::span<const double> followers,
                               std::span<const double> leaders, double alpha, const KernelTriple& k,
                               std::span<double> next, int workers) {
  const auto nff = static_cast<long long>(plan.ff_agents.size());
  const auto nfl = static_cast<long long>(plan.fl_agents.size());
#pragma omp parallel num_threads(workers)
  {
#pragma omp for schedule(static) nowait
    for (long long m = 0; m < nff; ++m) {
      const std::size_t i = plan.ff_agents[m];
      next[i] = ff_collision(followers[i], followers[plan.ff_partners[m]], alpha, k.ff);
    }
#pragma omp for schedule(static)
    for (long long m = 0; m < nfl; ++m) {
      const std::size_t j = plan.fl_agents[m];
      next[j] = fl_collision(followers[j], leaders[plan.fl_partners[m]], alpha, k.fl);
    }
  }
}

void apply_leader_collisions(const CollisionPlan& plan, std::span<const double> leaders, double alpha,
                             const KernelTriple& k, const PhiEstimator* phi, std::span<double> next,
                             std::span<double> phi_out, int workers) {
  const auto mll = static_cast<long long>(plan.ll_agents.size());
#pragma omp parallel for schedule(dynamic, 64) num_threads(workers)
  for (long long m = 0; m < mll; ++m) {
    const std::size_t i = plan.ll_agents[m];
    const double yi = leaders[i];
    const double yr = leaders[plan.ll_partners[m]];
    const double u = phi ? (*phi)(yi, yr) : 0.0;
    phi_out[m] = u;
    next[i] = ll_collision(yi, yr, alpha, k.ll, u);
  }
}

namespace serial {

void apply_follower_collisions(const CollisionPlan& plan, std::span<const double> followers,
                               std::span<const double> leaders, double alpha, const KernelTriple& k,
                               std::span<double> next) {
  for (std::size_t m = 0; m < plan.ff_agents.size(); ++m) {
    const std::size_t i = plan.ff_agents[m];
    next[i] = ff_collision(followers[i], followers[plan.ff_partners[m]], alpha, k.ff);
  }
  for (std::size_t m = 0; m < plan.fl_agents.size(); ++m) {
    const std::size_t j = plan.fl_agents[m];
    next[j] = fl_collision(followers[j], leaders[plan.fl_partners[m]], alpha, k.fl);
  }
}

void apply_leader_collisions(const CollisionPlan& plan, std::span<const double> leaders, double alpha,
                             const KernelTriple& k, const PhiEstimator* phi, std::span<double> next,
                             std::span<double> phi_out) {
  for (std::size_t m = 0; m < plan.ll_agents.size(); ++m) {
    const std::size_t i = plan.ll_agents[m];
    const double yi = leaders[i];
    const double yr = leaders[plan.ll_partners[m]];
    const double u = phi ? (*phi)(yi, yr) : 0.0;
    phi_out[m] = u;
    next[i] = ll_collision(yi, yr, alpha, k.ll, u);
  }
}

}  // namespace serial
}  // namespace dsmc

ParticleEnsemble tpbb_step(const ParticleEnsemble& e, const ScalingParams& sp,
                           const KernelTriple& k, const ControlSource& fb, Rng& rng,
                           StepStats* stats, int workers) {
  const bool controlled = fb.kind() != ControlKind::kNone;
  const CollisionPlan plan = plan_collisions(e, sp, controlled, rng);

  ParticleEnsemble next = e;
  next.t = e.t + sp.dt;
  dsmc::apply_follower_collisions(plan, e.followers, e.leaders, sp.alpha(), k, next.followers, workers);

  std::optional<PhiEstimator> phi;
  if (controlled && !plan.ll_agents.empty()) phi.emplace(fb, plan.control_samples, sp.estimator);
  std::vector<double> applied(plan.ll_agents.size());
  dsmc::apply_leader_collisions(plan, e.leaders, sp.alpha(), k, phi ? &*phi : nullptr, next.leaders,
                                applied, workers);

  if (stats) {
    *stats = {};
    stats->n_ff = static_cast<long long>(plan.ff_agents.size());
    stats->n_fl = static_cast<long long>(plan.fl_agents.size());
    stats->m_ll = static_cast<long long>(plan.ll_agents.size());
    for (double u : applied) {
      stats->phi_sum += u;
      stats->phi_sq_sum += u * u;
    }
  }
  return next;
}

namespace {

std::vector<double> strided_subsample(std::span<const double> xs, std::size_t count) {
  if (xs.size() <= count) return {xs.begin(), xs.end()};
  std::vector<double> out(count);
  for (std::size_t m = 0; m < count; ++m) out[m] = xs[m * xs.size() / count];
  return out;
}

}  // namespace

void control_surface(const ControlSource& fb, const ParticleEnsemble& e, int sigma,
                     PhiEstimatorKind kind, int points, double lo, double hi,
                     std::vector<double>& y, std::vector<double>& phi) {
  constexpr std::size_t kLeaderSamples = 64;
  y.resize(static_cast<std::size_t>(points));
  phi.assign(static_cast<std::size_t>(points), 0.0);
  for (int m = 0; m < points; ++m) {
    y[static_cast<std::size_t>(m)] = points > 1 ? lo + (hi - lo) * m / (points - 1) : lo;
  }
  if (fb.kind() == ControlKind::kNone || e.followers.empty() || e.leaders.empty()) return;
  const PhiEstimator est(fb, strided_subsample(e.followers, static_cast<std::size_t>(sigma)), kind);
  const auto partners = strided_subsample(e.leaders, kLeaderSamples);
  for (std::size_t m = 0; m < y.size(); ++m) {
    double acc = 0.0;
    for (double yr : partners) acc += est(y[m], yr);
    phi[m] = acc / static_cast<double>(partners.size());
  }
}

RunRecord run_tpbb(const SimulationSetup& setup, const ControlSource& fb, Rng& rng) {
  const ScalingParams& sp = setup.scaling;
  sp.validate(setup.rho_f, setup.rho_l);
  if (setup.n_followers == 0 || setup.n_leaders == 0) {
    throw ValidationError("populations: sample counts must be >= 1");
  }
  if (setup.stride < 1) throw ValidationError("output.stride must be >= 1");
  const long long steps = sp.steps();

  ParticleEnsemble e;
  e.rho_f = setup.rho_f;
  e.rho_l = setup.rho_l;
  e.followers = sample_uniform(setup.followers_init.lo, setup.followers_init.hi, setup.n_followers, rng);
  e.leaders = sample_uniform(setup.leaders_init.lo, setup.leaders_init.hi, setup.n_leaders, rng);

  RunRecord rec;
  CostAccumulator cost(setup.cost);
  const auto snapshot = [&](double t) {
    Snapshot s;
    s.t = t;
    s.followers = histogram(e.followers, setup.dx, e.rho_f, setup.domain_lo, setup.domain_hi);
    s.leaders = histogram(e.leaders, setup.dx, e.rho_l, setup.domain_lo, setup.domain_hi);
    control_surface(fb, e, sp.control_samples, sp.estimator, setup.surface_points, setup.domain_lo,
                    setup.domain_hi, s.surface_y, s.surface_phi);
    rec.snapshots.push_back(std::move(s));
  };
  const auto scalars = [&](double t) {
    rec.scalars.push_back({t, mean_opinion(e.followers), mean_opinion(e.leaders), cost.total()});
  };

  snapshot(0.0);
  scalars(0.0);
  for (long long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * sp.dt;
    StepStats st;
    ParticleEnsemble next = tpbb_step(e, sp, setup.kernels, fb, rng, &st, setup.workers);
    cost.add(t, sp.dt, e.followers, e.leaders, st.phi_sq_mean());
    rec.controls.push_back({t, st.n_ff, st.n_fl, st.m_ll, st.phi_mean(), st.phi_sq_mean()});
    e = std::move(next);
    e.t = static_cast<double>(n + 1) * sp.dt;
    scalars(e.t);
    if ((n + 1) % setup.stride == 0 || n + 1 == steps) snapshot(e.t);
  }
  rec.final_state = std::move(e);
  return rec;
}

}  // namespace tpbb
