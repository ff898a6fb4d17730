// Serial reference kernels against their OpenMP counterparts.
// Benchmarks taking an argument run the parallel kernel with that many threads.
#include <benchmark/benchmark.h>

#include <vector>

#include "tpbb/config.hpp"
#include "tpbb/dp_sweeps.hpp"
#include "tpbb/dsmc.hpp"
#include "tpbb/microsim.hpp"
#include "tpbb/riccati.hpp"
#include "tpbb/rng.hpp"

namespace {

using namespace tpbb;

struct SweepFixture {
  explicit SweepFixture(int nodes) : prob(make_setup(nodes), ControlGrid::for_setup(make_setup(nodes))) {
    const auto n = prob.setup.geometry.size();
    v.resize(n);
    out.resize(n);
    policy.resize(n);
    Rng rng(3);
    for (auto& x : v) x = uniform01(rng);
    for (auto& u : policy) u = 2.0 * uniform01(rng) - 1.0;
  }
  static DpSetup make_setup(int nodes) {
    auto setup = preset("test2").dp_setup();
    setup.geometry.nodes = nodes;
    return setup;
  }
  dp::SweepProblem prob;
  std::vector<double> v, out, policy;
};

constexpr int kSweepNodes = 17;

void BM_BellmanSweepSerial(benchmark::State& st) {
  SweepFixture f(kSweepNodes);
  for (auto _ : st) dp::serial::bellman_sweep(f.prob, f.v, f.out, f.policy);
  st.SetItemsProcessed(st.iterations() * static_cast<long long>(f.v.size()));
}
BENCHMARK(BM_BellmanSweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_BellmanSweepOmp(benchmark::State& st) {
  SweepFixture f(kSweepNodes);
  for (auto _ : st) dp::bellman_sweep(f.prob, f.v, f.out, f.policy, static_cast<int>(st.range(0)));
  st.SetItemsProcessed(st.iterations() * static_cast<long long>(f.v.size()));
}
BENCHMARK(BM_BellmanSweepOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_PolicySweepSerial(benchmark::State& st) {
  SweepFixture f(25);
  for (auto _ : st) dp::serial::policy_sweep(f.prob, f.policy, f.v, f.out, true);
  st.SetItemsProcessed(st.iterations() * static_cast<long long>(f.v.size()));
}
BENCHMARK(BM_PolicySweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_PolicySweepOmp(benchmark::State& st) {
  SweepFixture f(25);
  for (auto _ : st) dp::policy_sweep(f.prob, f.policy, f.v, f.out, true, static_cast<int>(st.range(0)));
  st.SetItemsProcessed(st.iterations() * static_cast<long long>(f.v.size()));
}
BENCHMARK(BM_PolicySweepOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

struct CollisionFixture {
  CollisionFixture() : cfg(preset("test1")), fb(ControlSource::riccati(riccati_feedback(cfg.cost, cfg.kernels))) {
    Rng rng(5);
    e.followers = sample_uniform(-1, 1, 10000, rng);
    e.leaders = sample_uniform(-1, 1, 5000, rng);
    plan = plan_collisions(e, cfg.scaling, true, rng);
    next_f = e.followers;
    next_l = e.leaders;
    phi_out.resize(plan.ll_agents.size());
  }
  RunConfig cfg;
  ControlSource fb;
  ParticleEnsemble e;
  CollisionPlan plan;
  std::vector<double> next_f, next_l, phi_out;
};

void BM_CollisionsSerial(benchmark::State& st) {
  CollisionFixture f;
  const PhiEstimator phi(f.fb, f.plan.control_samples, f.cfg.scaling.estimator);
  const double alpha = f.cfg.scaling.alpha();
  for (auto _ : st) {
    dsmc::serial::apply_follower_collisions(f.plan, f.e.followers, f.e.leaders, alpha, f.cfg.kernels, f.next_f);
    dsmc::serial::apply_leader_collisions(f.plan, f.e.leaders, alpha, f.cfg.kernels, &phi, f.next_l, f.phi_out);
  }
}
BENCHMARK(BM_CollisionsSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_CollisionsOmp(benchmark::State& st) {
  CollisionFixture f;
  const PhiEstimator phi(f.fb, f.plan.control_samples, f.cfg.scaling.estimator);
  const double alpha = f.cfg.scaling.alpha();
  const int w = static_cast<int>(st.range(0));
  for (auto _ : st) {
    dsmc::apply_follower_collisions(f.plan, f.e.followers, f.e.leaders, alpha, f.cfg.kernels, f.next_f, w);
    dsmc::apply_leader_collisions(f.plan, f.e.leaders, alpha, f.cfg.kernels, &phi, f.next_l, f.phi_out, w);
  }
}
BENCHMARK(BM_CollisionsOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

MicroState micro_fixture() {
  Rng rng(7);
  return {sample_uniform(-1, 1, 2000, rng), sample_uniform(-1, 1, 1000, rng), 0.0};
}

const KernelTriple kMicroKernels{KernelSpec::BoundedConfidence(0.3), KernelSpec::BoundedConfidence(0.8),
                                 KernelSpec::Constant(1)};

void BM_MicroStepSerial(benchmark::State& st) {
  const auto s = micro_fixture();
  for (auto _ : st) benchmark::DoNotOptimize(micro::serial::micro_step(s, 0.1, 0.01, kMicroKernels));
}
BENCHMARK(BM_MicroStepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_MicroStepOmp(benchmark::State& st) {
  const auto s = micro_fixture();
  const int w = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(micro_step(s, 0.1, 0.01, kMicroKernels, w));
}
BENCHMARK(BM_MicroStepOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
