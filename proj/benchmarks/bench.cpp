#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ckt/codec.hpp"
#include "ckt/estimator.hpp"
#include "ckt/mle.hpp"
#include "ckt/redundancy.hpp"

using namespace ckt;

namespace {

IntegrationConfig bench_cfg() {
  IntegrationConfig cfg;
  cfg.samples = 20000;
  cfg.seed = 7;
  return cfg;
}

std::vector<int> random_sequence(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> sym(1, m);
  std::vector<int> x(n);
  for (int& v : x) v = sym(rng);
  return x;
}

void BM_PredictUnconstrained(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto s = ConstraintSet::full(m);
  const auto x = random_sequence(m, 1000, 11);
  for (auto _ : state) {
    auto est = new_estimator(s, bench_cfg(), 0);
    for (int sym : x) {
      benchmark::DoNotOptimize(predict(est));
      update(est, sym);
    }
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_PredictUnconstrained)->Arg(2)->Arg(8);

void BM_PredictIntervalExact(benchmark::State& state) {
  const auto s = ConstraintSet::box(2, {0.2}, {0.6});
  const auto x = random_sequence(2, 1000, 12);
  for (auto _ : state) {
    auto est = new_estimator(s, bench_cfg(), 0);
    for (int sym : x) {
      benchmark::DoNotOptimize(predict(est));
      update(est, sym);
    }
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_PredictIntervalExact);

void BM_PredictBoxQuadrature(benchmark::State& state) {
  const auto s = ConstraintSet::box(3, {0.0, 0.0}, {0.6, 0.6});
  const auto x = random_sequence(3, 50, 13);
  for (auto _ : state) {
    auto est = new_estimator(s, bench_cfg(), 0);
    for (int sym : x) {
      benchmark::DoNotOptimize(predict(est));
      update(est, sym);
    }
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_PredictBoxQuadrature)->Unit(benchmark::kMillisecond);

void BM_PredictBoxSampled(benchmark::State& state) {
  auto cfg = bench_cfg();
  cfg.quadrature_max_m = 2;
  cfg.samples = static_cast<std::int64_t>(state.range(0));
  const auto s = ConstraintSet::box(3, {0.0, 0.0}, {0.6, 0.6});
  const auto x = random_sequence(3, 50, 14);
  for (auto _ : state) {
    auto est = new_estimator(s, cfg, 0);
    for (int sym : x) {
      benchmark::DoNotOptimize(predict(est));
      update(est, sym);
    }
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_PredictBoxSampled)->Arg(5000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_EncodeUnconstrained(benchmark::State& state) {
  const auto s = ConstraintSet::full(2);
  const auto cfg = bench_cfg();
  const auto x = random_sequence(2, 2000, 15);
  for (auto _ : state) benchmark::DoNotOptimize(encode(x, s, cfg, 99));
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_EncodeUnconstrained);

void BM_RoundTripBox(benchmark::State& state) {
  const auto s = ConstraintSet::box(4, {0.0, 0.0, 0.0}, {0.7, 0.7, 0.7});
  auto cfg = bench_cfg();
  cfg.quadrature_max_m = 2;
  cfg.samples = 2000;
  const auto x = random_sequence(4, 300, 16);
  for (auto _ : state) {
    const auto buf = encode(x, s, cfg, 100);
    benchmark::DoNotOptimize(decode(buf, s, cfg, 100));
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_RoundTripBox)->Unit(benchmark::kMillisecond);

void BM_ShtarkovSum(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const std::int64_t n = state.range(1);
  const auto s = ConstraintSet::full(m);
  for (auto _ : state) benchmark::DoNotOptimize(shtarkov_sum(s, n));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ShtarkovSum)->Args({2, 1024})->Args({2, 16384})->Args({3, 512})->Unit(benchmark::kMillisecond);

void BM_MeasureQuadrature(benchmark::State& state) {
  const auto s = ConstraintSet::box(3, {0.1, 0.1}, {0.5, 0.5});
  DirichletParams alpha{{3.5, 2.5, 4.0}};
  const auto cfg = bench_cfg();
  for (auto _ : state) benchmark::DoNotOptimize(dirichlet_measure(s, alpha, cfg));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MeasureQuadrature)->Unit(benchmark::kMillisecond);

void BM_MeasureMonteCarlo(benchmark::State& state) {
  auto cfg = bench_cfg();
  cfg.samples = static_cast<std::int64_t>(state.range(0));
  const auto s = ConstraintSet::box(3, {0.1, 0.1}, {0.5, 0.5});
  DirichletParams alpha{{3.5, 2.5, 4.0}};
  for (auto _ : state) benchmark::DoNotOptimize(dirichlet_measure_monte_carlo(s, alpha, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.samples);
}
BENCHMARK(BM_MeasureMonteCarlo)->Arg(20000)->Arg(200000)->Unit(benchmark::kMillisecond);

void BM_ConstrainedMle(benchmark::State& state) {
  const auto s = ConstraintSet::box(3, {0.1, 0.0}, {0.4, 0.5});
  const CountVector counts({14, 2, 4});
  for (auto _ : state) benchmark::DoNotOptimize(constrained_mle(s, counts));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ConstrainedMle);

}  // namespace

BENCHMARK_MAIN();
