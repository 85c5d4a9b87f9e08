#include <benchmark/benchmark.h>

#include <random>

#include "relscat/freefield.hpp"
#include "relscat/potential.hpp"
#include "relscat/sphere.hpp"
#include "relscat/xray.hpp"

using namespace relscat;

namespace {

ShExpansion random_expansion(int lmax) {
  std::mt19937 rng(1);
  std::normal_distribution<double> n;
  ShExpansion e(lmax);
  for (auto& c : e.c) c = cplx(n(rng), n(rng));
  return e;
}

PolyhomPotential two_layers() {
  PolyhomPotential v;
  HomLayer a;
  a.order = 3.5;
  a.angular = ShExpansion(2);
  a.angular.at(0, 0) = std::sqrt(4 * kPi);
  a.angular.at(1, 0) = 0.5 * std::sqrt(4 * kPi / 3);
  HomLayer b;
  b.order = 4.5;
  b.angular = ShExpansion(1);
  b.angular.at(0, 0) = 2.0;
  v.layers = {a, b};
  v.bumps.push_back({Vec3(0.2, 0.1, -0.3), 0.6, 0.5});
  return v;
}

void BM_ShAnalyze(benchmark::State& st) {
  int L = int(st.range(0));
  auto g = SphereGrid::for_degree(2 * L);
  auto f = sh_synthesize(random_expansion(L), g);
  for (auto _ : st) benchmark::DoNotOptimize(sh_analyze(f, L));
  st.SetComplexityN(L);
}
BENCHMARK(BM_ShAnalyze)->RangeMultiplier(2)->Range(8, 64)->Complexity();

void BM_RadialMultiplier(benchmark::State& st) {
  VolumeGrid g(int(st.range(0)), 12.0);
  auto u = VolumeField::sample(g, [](const Vec3& x) { return cplx(std::exp(-x.squaredNorm() / 2)); });
  for (auto _ : st) benchmark::DoNotOptimize(apply_radial_multiplier(u, symbols::abs_xi()));
  st.SetItemsProcessed(int64_t(st.iterations()) * int64_t(g.size()));
}
BENCHMARK(BM_RadialMultiplier)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_TransformEvaluator(benchmark::State& st) {
  TransformEvaluator ev(two_layers());
  std::mt19937 rng(2);
  std::normal_distribution<double> n;
  std::vector<Vec3> xi(256);
  for (auto& x : xi) x = Vec3(n(rng), n(rng), n(rng));
  for (auto _ : st)
    for (const auto& x : xi) benchmark::DoNotOptimize(ev(x));
  st.SetItemsProcessed(int64_t(st.iterations()) * 256);
}
BENCHMARK(BM_TransformEvaluator)->Unit(benchmark::kMicrosecond);

void BM_LineIntegral(benchmark::State& st) {
  auto v = two_layers();
  LineSpec line{Vec3(0, 0, 1), Vec3(3.0, 0, 0)};
  for (auto _ : st) benchmark::DoNotOptimize(line_integral(v, line));
}
BENCHMARK(BM_LineIntegral)->Unit(benchmark::kMicrosecond);

void BM_FarFieldFit(benchmark::State& st) {
  double lambda = 1.0;
  auto dirs = SphereGrid::product(8, 16);
  auto radii = linspace(40.0, 80.0, 24);
  auto h = random_expansion(3);
  std::vector<std::vector<cplx>> s;
  for (double r : radii) {
    std::vector<Vec3> pts;
    for (auto& d : dirs->nodes()) pts.push_back(r * d);
    s.push_back(herglotz_sh(lambda, h, pts));
  }
  for (auto _ : st) benchmark::DoNotOptimize(farfield_fit_samples(s, radii, lambda, dirs));
}
BENCHMARK(BM_FarFieldFit)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
