#include "tpbb/dp_sweeps.hpp"

#include <cmath>

#include "bellman_select.hpp"

namespace tpbb::dp {

SweepProblem::SweepProblem(const DpSetup& s, const ControlGrid& cg)
    : setup(s), control_grid(cg), controls(cg.search_order().begin(), cg.search_order().end()),
      beta(s.cost.discount()) {}

namespace {

struct NodeContext {
  const SweepProblem& prob;
  AxisLocator loc;
  std::size_t n;
};

inline BinaryState node_state(const GridGeometry& g, std::size_t i1, std::size_t i2,
                              std::size_t j1, std::size_t j2) {
  return {g.coord(i1), g.coord(i2), g.coord(j1), g.coord(j2)};
}

// Same arithmetic as bellman_update, with the control-independent follower
// part hoisted out of the control loop.
inline void bellman_node(const NodeContext& ctx, std::span<const double> v, const BinaryState& s,
                         double& out, double& policy) {
  const auto& p = ctx.prob.setup.cost;
  const auto& k = ctx.prob.setup.kernels;
  const BinaryState drift = binary_step(s, 0.0, p.dt, k);
  const AxisStencil sx1 = ctx.loc(drift.x1);
  const AxisStencil sx2 = ctx.loc(drift.x2);
  const double r1 = 0.5 * interaction_velocity(k.ll, s.y1, s.y2);
  const double r2 = 0.5 * interaction_velocity(k.ll, s.y2, s.y1);
  const double sc = state_cost(s, p);
  detail::ArgminTracker best;
  for (double u : ctx.prob.controls) {
    const double y1 = s.y1 + p.dt * (r1 + u);
    const double y2 = s.y2 + p.dt * (r2 + u);
    const double vn = interpolate_stencils(v, ctx.n, sx1, sx2, ctx.loc(y1), ctx.loc(y2));
    best.offer(ctx.prob.beta * vn + p.dt * (sc + p.gamma * u * u), u);
  }
  out = best.value();
  policy = best.control();
}

inline double policy_node(const NodeContext& ctx, std::span<const double> v, const BinaryState& s,
                          double u, bool with_cost) {
  const auto& p = ctx.prob.setup.cost;
  const BinaryState next = binary_step(s, u, p.dt, ctx.prob.setup.kernels);
  const double vn = interpolate_stencils(v, ctx.n, ctx.loc(next.x1), ctx.loc(next.x2),
                                         ctx.loc(next.y1), ctx.loc(next.y2));
  double out = ctx.prob.beta * vn;
  if (with_cost) out += p.dt * running_cost(s, u, p);
  return out;
}

}  // namespace

void bellman_sweep(const SweepProblem& prob, std::span<const double> v, std::span<double> out,
                   std::span<double> policy, int workers) {
  const auto& g = prob.setup.geometry;
  const NodeContext ctx{prob, AxisLocator(g), static_cast<std::size_t>(g.nodes)};
  const auto n = static_cast<long long>(g.nodes);
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long long outer = 0; outer < n * n; ++outer) {
    const auto i1 = static_cast<std::size_t>(outer / n);
    const auto i2 = static_cast<std::size_t>(outer % n);
    for (std::size_t j1 = 0; j1 < ctx.n; ++j1) {
      for (std::size_t j2 = 0; j2 < ctx.n; ++j2) {
        const std::size_t idx = g.index(i1, i2, j1, j2);
        bellman_node(ctx, v, node_state(g, i1, i2, j1, j2), out[idx], policy[idx]);
      }
    }
  }
}

void policy_sweep(const SweepProblem& prob, std::span<const double> policy,
                  std::span<const double> v, std::span<double> out, bool with_cost, int workers) {
  const auto& g = prob.setup.geometry;
  const NodeContext ctx{prob, AxisLocator(g), static_cast<std::size_t>(g.nodes)};
  const auto n = static_cast<long long>(g.nodes);
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long long outer = 0; outer < n * n; ++outer) {
    const auto i1 = static_cast<std::size_t>(outer / n);
    const auto i2 = static_cast<std::size_t>(outer % n);
    for (std::size_t j1 = 0; j1 < ctx.n; ++j1) {
      for (std::size_t j2 = 0; j2 < ctx.n; ++j2) {
        const std::size_t idx = g.index(i1, i2, j1, j2);
        out[idx] = policy_node(ctx, v, node_state(g, i1, i2, j1, j2), policy[idx], with_cost);
      }
    }
  }
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  const auto size = static_cast<long long>(a.size());
#pragma omp parallel for reduction(max : m) schedule(static)
  for (long long i = 0; i < size; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

namespace serial {

void bellman_sweep(const SweepProblem& prob, std::span<const double> v, std::span<double> out,
                   std::span<double> policy) {
  ValueGrid grid;
  grid.setup = prob.setup;
  grid.values.assign(v.begin(), v.end());
  const ControlGrid& cg = prob.control_grid;
  const auto& g = prob.setup.geometry;
  const auto n = static_cast<std::size_t>(g.nodes);
  std::size_t idx = 0;
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2)
      for (std::size_t j1 = 0; j1 < n; ++j1)
        for (std::size_t j2 = 0; j2 < n; ++j2, ++idx) {
          const BellmanChoice c = bellman_update(grid, node_state(g, i1, i2, j1, j2), cg,
                                                 prob.setup.cost, prob.setup.kernels);
          out[idx] = c.value;
          policy[idx] = c.control;
        }
}

void policy_sweep(const SweepProblem& prob, std::span<const double> policy,
                  std::span<const double> v, std::span<double> out, bool with_cost) {
  const auto& g = prob.setup.geometry;
  const auto& p = prob.setup.cost;
  const auto n = static_cast<std::size_t>(g.nodes);
  std::size_t idx = 0;
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2)
      for (std::size_t j1 = 0; j1 < n; ++j1)
        for (std::size_t j2 = 0; j2 < n; ++j2, ++idx) {
          const BinaryState s = node_state(g, i1, i2, j1, j2);
          const double u = policy[idx];
          const BinaryState next = binary_step(s, u, p.dt, prob.setup.kernels);
          double r = prob.beta * interpolate(v, g, next);
          if (with_cost) r += p.dt * running_cost(s, u, p);
          out[idx] = r;
        }
}

}  // namespace serial

}  // namespace tpbb::dp
