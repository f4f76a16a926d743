#include "qstrat/catalog.hpp"
#include "qstrat/covering.hpp"
#include "qstrat/energy.hpp"
#include "qstrat/jones_beta.hpp"
#include "qstrat/symmetry.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace qstrat;

namespace {

SampledMap radial(int m, double h) {
  GridDomain d;
  d.m = m;
  d.R = 3.0;
  d.h = h;
  return sample_map(radial_map(m), d);
}

DiscreteMeasure cloud(int m, int atoms) {
  std::mt19937_64 g(1);
  std::normal_distribution<double> N(0.0, 0.3);
  DiscreteMeasure mu(m);
  for (int i = 0; i < atoms; ++i) {
    Vec x(m);
    for (int j = 0; j < m; ++j) x[j] = N(g);
    mu.add(x, 1.0);
  }
  return mu;
}

}  // namespace

static void BM_ThetaRadial3(benchmark::State& state) {
  SampledMap map = radial(3, 3.0 / state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(theta(map, Vec::Zero(3), 0.5));
}
BENCHMARK(BM_ThetaRadial3)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_ThetaRadial4(benchmark::State& state) {
  SampledMap map = radial(4, 0.125);
  for (auto _ : state) benchmark::DoNotOptimize(theta(map, Vec::Zero(4), 1.0));
}
BENCHMARK(BM_ThetaRadial4)->Unit(benchmark::kMillisecond);

static void BM_KSymDistance(benchmark::State& state) {
  SampledMap map = radial(3, 3.0 / 64.0);
  Vec x = Vec::Zero(3);
  x[0] = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(ksym_distance(map, x, 0.25, static_cast<int>(state.range(0))).eps_hat);
}
BENCHMARK(BM_KSymDistance)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

static void BM_Beta2(benchmark::State& state) {
  DiscreteMeasure mu = cloud(3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(beta2(mu, Vec::Zero(3), 1.0, 1).beta2);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Beta2)->RangeMultiplier(8)->Range(8, 32768)->Complexity(benchmark::oN);

static void BM_Beta2BruteForce(benchmark::State& state) {
  DiscreteMeasure mu = cloud(3, 20);
  for (auto _ : state) benchmark::DoNotOptimize(beta2_bruteforce(mu, Vec::Zero(3), 1.0, 1, 20));
}
BENCHMARK(BM_Beta2BruteForce)->Unit(benchmark::kMillisecond);

static void BM_VitaliSubcover(benchmark::State& state) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0), R(0.005, 0.05);
  std::vector<Ball> balls;
  for (long i = 0; i < state.range(0); ++i) {
    Vec c(3);
    c << U(g), U(g), U(g);
    balls.push_back({c, R(g), BallLabel::good});
  }
  for (auto _ : state) benchmark::DoNotOptimize(vitali_subcover(balls).size());
}
BENCHMARK(BM_VitaliSubcover)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
