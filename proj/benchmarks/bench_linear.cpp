#include <benchmark/benchmark.h>

#include "anchor/linear.hpp"
#include "anchor/scm.hpp"

namespace {

void BM_LinearAnchorFit(benchmark::State& state) {
  const anchor::Dataset d = anchor::generate(anchor::canonical_scm(), state.range(0), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(anchor::fit_linear_anchor(d, 4.0, {0.0, 1.0}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LinearAnchorFit)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_LassoPathPoint(benchmark::State& state) {
  const anchor::Dataset d = anchor::generate(anchor::canonical_scm(), state.range(0), 1.0);
  const double lmax = anchor::lambda_max(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(anchor::fit_linear_anchor(d, 1.0, {lmax / 100.0, 1.0}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LassoPathPoint)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
