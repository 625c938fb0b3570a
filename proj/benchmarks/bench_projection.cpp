#include <benchmark/benchmark.h>

#include "anchor/projection.hpp"
#include "anchor/rng.hpp"

namespace {

void BM_GroupMeanApply(benchmark::State& state) {
  const int64_t n = state.range(0);
  const int n_envs = 6;
  anchor::Rng rng(1);
  std::vector<int32_t> env(n);
  for (int64_t i = 0; i < n; ++i)
    env[i] = static_cast<int32_t>(i < n_envs ? i : rng.below(n_envs));
  const anchor::ProjectionOperator op = anchor::ProjectionOperator::group_mean(env, n_envs);
  Eigen::VectorXd v(n);
  for (int64_t i = 0; i < n; ++i) v[i] = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.apply(v));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_GroupMeanApply)->Arg(10000)->Arg(1000000);

void BM_OrthonormalApply(benchmark::State& state) {
  const int64_t n = state.range(0);
  anchor::Rng rng(2);
  Eigen::MatrixXd a(n, 4);
  for (int64_t i = 0; i < n; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = rng.normal();
  const anchor::ProjectionOperator op = anchor::ProjectionOperator::orthonormal(a);
  Eigen::VectorXd v(n);
  for (int64_t i = 0; i < n; ++i) v[i] = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.apply(v));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_OrthonormalApply)->Arg(10000)->Arg(200000);

}  // namespace
