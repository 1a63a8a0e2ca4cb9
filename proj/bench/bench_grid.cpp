#include <benchmark/benchmark.h>

#include <cmath>

#include "qszasz/analysis.hpp"
#include "qszasz/grid_kernels.hpp"

using namespace qszasz;

namespace {

const auto decay = RealFunction::generic([](const auto& t) {
  using std::exp;
  return exp(-t);
});

Execution mode(const benchmark::State& state) {
  return state.range(0) ? Execution::parallel : Execution::serial;
}

void BM_Deviation(benchmark::State& state) {
  const auto xs = GridSpec{10.0, 401}.points();
  const QContext ctx(1.5, 8);
  for (auto _ : state) {
    auto r = deviation_on_grid(decay, xs, ctx, {}, mode(state));
    benchmark::DoNotOptimize(r.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}

void BM_ClassicalDeviation(benchmark::State& state) {
  const auto xs = GridSpec{10.0, 2001}.points();
  for (auto _ : state) {
    auto r = classical_deviation_on_grid(decay, xs, 32, {}, mode(state));
    benchmark::DoNotOptimize(r.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}

void BM_Steklov(benchmark::State& state) {
  const auto xs = GridSpec{10.0, 2001}.points();
  const auto rule = gauss_legendre(64);
  for (auto _ : state) {
    auto r = steklov_on_grid(decay, 0.2, xs, rule, mode(state));
    benchmark::DoNotOptimize(r.fh.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}

}  // namespace

BENCHMARK(BM_Deviation)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassicalDeviation)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Steklov)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
