// Tabulated OpenMP kernels against the serial member-walking reference.

#include "flowtree/maximal.hpp"
#include "flowtree/reference.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace flowtree;

namespace {

struct Fixture {
  explicit Fixture(int depth)
      : tree(build_homogeneous_slab(2, depth, 0)), measure(canonical_flow(tree)), f(tree.size()), w(tree.size()) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(depth));
    for (VertexId x = 0; x < tree.size(); ++x) {
      f[x] = Rational(static_cast<long>(rng() % 41) - 20);
      w[x] = Rational(static_cast<long>(1 + rng() % 4));
    }
  }
  TruncatedTree tree;
  FlowMeasure measure;
  std::vector<Rational> f;
  std::vector<Rational> w;
};

void BM_MaximalKernel(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(maximal_function(fx.measure, Beta{}, fx.f));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(fx.tree.size()));
}

void BM_MaximalReference(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::maximal_function(fx.f, fx.measure, Beta{}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(fx.tree.size()));
}

void BM_A2Kernel(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  const Weight w(fx.tree, fx.w);
  for (auto _ : state) benchmark::DoNotOptimize(ap_constant(w, fx.measure, Beta{}, Rational(2)));
}

void BM_A2Reference(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::a2_constant(fx.w, fx.measure, Beta{}));
}

void BM_A2Interval(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  const Weight w(fx.tree, fx.w);
  for (auto _ : state) benchmark::DoNotOptimize(ap_constant_float(w, fx.measure, Beta{}, Rational(2)));
}

}  // namespace

BENCHMARK(BM_MaximalKernel)->DenseRange(6, 12, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaximalReference)->DenseRange(6, 8, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_A2Kernel)->DenseRange(6, 12, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_A2Reference)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_A2Interval)->DenseRange(6, 12, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
