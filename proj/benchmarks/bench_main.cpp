#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "nlbe/bounds.hpp"
#include "nlbe/distribution.hpp"
#include "nlbe/simulation.hpp"

namespace {

using namespace nlbe;

void BM_GaussianDraw(benchmark::State& state) {
  Rng rng(1);
  double acc = 0.0;
  for (auto _ : state) acc += rng.gauss();
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_GaussianDraw);

void BM_ExponentialDraw(benchmark::State& state) {
  Rng rng(1);
  double acc = 0.0;
  for (auto _ : state) acc += rng.expo();
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_ExponentialDraw);

void BM_HeavyTailDraw(benchmark::State& state) {
  const LogPowerTail v(2.5);
  Rng rng(1);
  double acc = 0.0;
  for (auto _ : state) acc += v.sample(rng);
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_HeavyTailDraw);

void BM_StudentReplicate(benchmark::State& state) {
  const long n = state.range(0);
  const auto spec = DistributionSpec::standardized_exponential(1.0);
  Rng rng(2);
  double acc = 0.0;
  for (auto _ : state) {
    double s1 = 0.0, s2 = 0.0;
    for (long i = 0; i < n; ++i) {
      const double x = spec.draw1(rng);
      s1 += x;
      s2 += x * x;
    }
    const double m = s1 / static_cast<double>(n);
    acc += m / (s2 / static_cast<double>(n) - m * m);
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_StudentReplicate)->Arg(100)->Arg(1000);

void BM_UniformKsDistance(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> vals(200000);
  for (auto& v : vals) v = rng.gauss();
  std::sort(vals.begin(), vals.end());
  for (auto _ : state) {
    benchmark::DoNotOptimize(uniform_ks_distance(vals));
  }
}
BENCHMARK(BM_UniformKsDistance);

void BM_NonuniformBound(benchmark::State& state) {
  BoundInputs in;
  in.norm_L = 1.3;
  in.sigma = 0.9;
  in.M = 3.0;
  in.epsilon = 0.7;
  in.p = 3.0;
  in.profile = moment_profile(DistributionSpec::standardized_exponential(0.0),
                              {1.5, 2.0, 3.0}, 50);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nonuniform_fS_bound(in, 2.0));
  }
}
BENCHMARK(BM_NonuniformBound);

}  // namespace

BENCHMARK_MAIN();
