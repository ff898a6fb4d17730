#include "tpbb/dp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bellman_select.hpp"
#include "tpbb/dp_sweeps.hpp"
#include "tpbb/errors.hpp"

namespace tpbb {

ControlGrid::ControlGrid(double u_min, double u_max, int nodes) {
  if (nodes < 3 || nodes % 2 == 0) throw ValidationError("control grid needs an odd count >= 3");
  if (!(u_min < u_max)) throw ValidationError("control grid needs u_min < u_max");
  spacing_ = (u_max - u_min) / (nodes - 1);
  values_.resize(static_cast<std::size_t>(nodes));
  // Weighted form keeps symmetric intervals exactly antisymmetric with an exact 0.
  const double last = nodes - 1;
  for (int i = 0; i < nodes; ++i) {
    values_[static_cast<std::size_t>(i)] = (u_min * (last - i) + u_max * i) / last;
  }
  order_ = values_;
  std::stable_sort(order_.begin(), order_.end(), [](double a, double b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a < b;
  });
}

BellmanChoice bellman_update(const ValueGrid& v, const BinaryState& s, const ControlGrid& cg,
                             const CostParams& p, const KernelTriple& k) {
  const double beta = p.discount();
  detail::ArgminTracker best;
  for (double u : cg.search_order()) {
    const BinaryState next = binary_step(s, u, p.dt, k);
    best.offer(beta * interpolate_value(v, next) + p.dt * running_cost(s, u, p), u);
  }
  return {best.value(), best.control()};
}

std::vector<double> tabulate_policy(const ValueGrid& v, const ControlGrid& cg, int workers) {
  const dp::SweepProblem prob(v.setup, cg);
  std::vector<double> scratch(v.values.size());
  std::vector<double> policy(v.values.size());
  dp::bellman_sweep(prob, v.values, scratch, policy, workers);
  return policy;
}

DpResult value_iteration(ValueGrid v0, const ControlGrid& cg, const SolveOptions& opts) {
  if (!(opts.tol > 0.0)) throw ValidationError("dp.tol must be > 0");
  const dp::SweepProblem prob(v0.setup, cg);
  DpResult result;
  result.grid = std::move(v0);
  auto& values = result.grid.values;
  std::vector<double> next(values.size());
  result.policy.assign(values.size(), 0.0);

  auto& diag = result.grid.diagnostics;
  diag = {};
  diag.residual = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= opts.max_iter; ++k) {
    dp::bellman_sweep(prob, values, next, result.policy, opts.workers);
    ++result.grid_passes;
    const double r = dp::sup_distance(next, values);
    values.swap(next);
    result.residual_log.push_back(r);
    diag.iterations = k;
    diag.residual = r;
    if (opts.progress) opts.progress(k, r);
    if (r < opts.tol) {
      diag.converged = true;
      break;
    }
  }
  return result;
}

namespace {

// Deterministic blocked reductions: the block partition is fixed, so results
// do not depend on the number of threads.
constexpr long long kBlock = 8192;

double dot(std::span<const double> a, std::span<const double> b, int workers) {
  const auto n = static_cast<long long>(a.size());
  const long long blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long long blk = 0; blk < blocks; ++blk) {
    double s = 0.0;
    const long long end = std::min(n, (blk + 1) * kBlock);
    for (long long i = blk * kBlock; i < end; ++i) s += a[i] * b[i];
    partial[static_cast<std::size_t>(blk)] = s;
  }
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

double sup_norm(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

// y = a*x + y style updates, parallel element-wise.
template <class F>
void for_each_index(std::size_t n, int workers, F&& f) {
  const auto size = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long long i = 0; i < size; ++i) f(static_cast<std::size_t>(i));
}

class PolicyEvaluator {
 public:
  PolicyEvaluator(const dp::SweepProblem& prob, int workers)
      : prob_(prob), workers_(workers), n_(prob.setup.geometry.size()) {}

  long long passes() const { return passes_; }

  // A x = x - beta P_pi x
  void apply(std::span<const double> policy, std::span<const double> x, std::span<double> out) {
    dp::policy_sweep(prob_, policy, x, out, false, workers_);
    ++passes_;
    for_each_index(n_, workers_, [&](std::size_t i) { out[i] = x[i] - out[i]; });
  }

  // Solves (I - beta P_pi) x = c in place, starting from the incoming x.
  void solve(std::span<const double> policy, std::vector<double>& x, double tol) {
    std::vector<double> b(n_), zero(n_, 0.0);
    dp::policy_sweep(prob_, policy, zero, b, true, workers_);
    ++passes_;
    std::vector<double> r(n_), rhat(n_), p(n_, 0.0), v(n_, 0.0), s(n_), t(n_);

    const auto residual = [&] {
      apply(policy, x, r);
      for_each_index(n_, workers_, [&](std::size_t i) { r[i] = b[i] - r[i]; });
      return sup_norm(r);
    };

    double rnorm = residual();
    const double floor_tol = 64.0 * std::numeric_limits<double>::epsilon() * sup_norm(b) /
                             (1.0 - prob_.beta);
    tol = std::max(tol, floor_tol);
    if (rnorm < tol) return;

    for (int restart = 0; restart < 8 && rnorm >= tol; ++restart) {
      rhat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      double rho = 1.0, alpha = 1.0, omega = 1.0;
      for (int it = 0; it < 4000; ++it) {
        const double rho_new = dot(rhat, r, workers_);
        if (rho_new == 0.0 || !std::isfinite(rho_new)) break;
        const double beta = (rho_new / rho) * (alpha / omega);
        for_each_index(n_, workers_, [&](std::size_t i) { p[i] = r[i] + beta * (p[i] - omega * v[i]); });
        apply(policy, p, v);
        const double denom = dot(rhat, v, workers_);
        if (denom == 0.0 || !std::isfinite(denom)) break;
        alpha = rho_new / denom;
        for_each_index(n_, workers_, [&](std::size_t i) { s[i] = r[i] - alpha * v[i]; });
        if (sup_norm(s) < tol) {
          for_each_index(n_, workers_, [&](std::size_t i) { x[i] += alpha * p[i]; });
          break;
        }
        apply(policy, s, t);
        const double tt = dot(t, t, workers_);
        if (tt == 0.0) break;
        omega = dot(t, s, workers_) / tt;
        for_each_index(n_, workers_, [&](std::size_t i) {
          x[i] += alpha * p[i] + omega * s[i];
          r[i] = s[i] - omega * t[i];
        });
        if (sup_norm(r) < tol || omega == 0.0) break;
        rho = rho_new;
      }
      // Recompute the true residual; restart on breakdown or drift.
      rnorm = residual();
    }

    // Krylov stagnation fallback: plain fixed-point sweeps.
    std::vector<double> next(n_);
    for (int it = 0; it < 200000 && rnorm >= tol; ++it) {
      dp::policy_sweep(prob_, policy, x, next, true, workers_);
      ++passes_;
      rnorm = dp::sup_distance(next, x);
      x.swap(next);
    }
  }

 private:
  const dp::SweepProblem& prob_;
  int workers_;
  std::size_t n_;
  long long passes_ = 0;
};

}  // namespace

DpResult policy_iteration(ValueGrid v0, const ControlGrid& cg, const SolveOptions& opts) {
  if (!(opts.tol > 0.0)) throw ValidationError("dp.tol must be > 0");
  const dp::SweepProblem prob(v0.setup, cg);
  DpResult result;
  result.grid = std::move(v0);
  auto& values = result.grid.values;
  const std::size_t n = values.size();
  std::vector<double> improved(n);
  std::vector<double> policy(n);
  PolicyEvaluator evaluator(prob, opts.workers);

  dp::bellman_sweep(prob, values, improved, policy, opts.workers);
  long long passes = 1;
  // Evaluation accuracy well below tol: ||V - V_pi|| <= ||r|| / (1 - beta).
  const double eval_tol = 0.1 * opts.tol * (1.0 - prob.beta);

  auto& diag = result.grid.diagnostics;
  diag = {};
  diag.residual = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= opts.max_iter; ++k) {
    evaluator.solve(policy, values, eval_tol);
    std::vector<double> next_policy(n);
    dp::bellman_sweep(prob, values, improved, next_policy, opts.workers);
    ++passes;
    const double r = dp::sup_distance(improved, values);
    result.residual_log.push_back(r);
    diag.iterations = k;
    diag.residual = r;
    if (opts.progress) opts.progress(k, r);
    const bool stable = next_policy == policy;
    policy.swap(next_policy);
    if (r < opts.tol) {
      diag.converged = true;
      break;
    }
    if (stable) {
      // Same policy again: only evaluation accuracy limits the residual.
      break;
    }
  }
  result.policy = std::move(policy);
  result.grid_passes = passes + evaluator.passes();
  return result;
}

}  // namespace tpbb
