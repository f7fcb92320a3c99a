// Serial reference against OpenMP execution for the ensemble kernels.

#include <benchmark/benchmark.h>
#include <glog/logging.h>

#include <random>
#include <vector>

#include "heatchain/dynamics.hpp"
#include "heatchain/mam.hpp"
#include "heatchain/measure.hpp"
#include "heatchain/sde.hpp"

using namespace heatchain;

namespace {

ModelParams double_well(double eps) {
  return ModelParams::make(2, 1, {PotentialKind::quartic_double_well, {0, 0, -0.5, 0, 0.25}},
                           {PotentialKind::quadratic, {0, 0, 0.5}}, 1.0, 0.1, eps, 0.0);
}

ModelParams harmonic(double eps, double eta) {
  return ModelParams::make(2, 1, {PotentialKind::quadratic, {0, 0, 0.5}}, {PotentialKind::quadratic, {0, 0, 0.5}},
                           1.0, 0.5, eps, eta);
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void BM_CriticalPoints(benchmark::State& state) {
  const auto m = double_well(0.0);
  const auto seeds = default_seeds(m, 3.0, 7);
  for (auto _ : state) benchmark::DoNotOptimize(find_critical_points(m, seeds, {}, exec_of(state)));
}

void BM_OmegaLimit(benchmark::State& state) {
  const auto m = double_well(0.0);
  const auto sets = find_critical_points(m, default_seeds(m, 3.0, 7), {}, Exec::serial);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<State> starts;
  for (int k = 0; k < 64; ++k) {
    State x(2, 1);
    for (auto& v : x.vec()) v = u(rng);
    starts.push_back(x);
  }
  for (auto _ : state) benchmark::DoNotOptimize(omega_limit_batch(m, sets, starts, {}, exec_of(state)));
}

void BM_HittingTimes(benchmark::State& state) {
  const auto m = double_well(0.3);
  const auto sets = find_critical_points(m, default_seeds(m, 3.0, 7), {}, Exec::serial);
  const Region target = Region::ball(sets[1].point.vec(), 0.3, {2, 3});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        hitting_times(m, sets[0].point, target, 0.01, 7, 1e5, 32, exec_of(state), SdeScheme::semi_implicit));
  }
}

void BM_DirectOccupation(benchmark::State& state) {
  const auto m = harmonic(0.2, 0.0);
  SamplingOptions o;
  o.T_burn = 10.0;
  o.T_sample = 200.0;
  o.replicas = 16;
  o.seed = 3;
  const Region box = Region::ball(Vec::Zero(6), 0.5, {2, 3});
  for (auto _ : state) benchmark::DoNotOptimize(estimate_mu(m, State(2, 1), box, o, exec_of(state)));
}

void BM_PairwiseCosts(benchmark::State& state) {
  const auto m = harmonic(0.0, 0.4);
  const auto sets = find_critical_points(m, default_seeds(m, 1.0, 3), {}, Exec::serial);
  std::vector<State> targets;
  for (double q : {-0.5, 0.5}) {
    for (double s : {-0.5, 0.5}) {
      State y(2, 1);
      y.vec() << 0, 0, q, s, 0.5 * q, 0.5 * s;
      targets.push_back(y);
    }
  }
  PairOptions o;
  o.T_grid = {2, 4, 8};
  o.check_warm_start = false;
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_costs(m, sets, targets, o, exec_of(state)));
}

}  // namespace

// Argument 0 runs the serial reference, 1 the OpenMP path.
BENCHMARK(BM_CriticalPoints)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OmegaLimit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HittingTimes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DirectOccupation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairwiseCosts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  FLAGS_minloglevel = 2;
  google::InitGoogleLogging(argv[0]);
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
