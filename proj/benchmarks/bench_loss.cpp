#include <benchmark/benchmark.h>

#include "anchor/loss.hpp"
#include "anchor/rng.hpp"

namespace {

struct LossFixture {
  anchor::ProjectionOperator proj;
  Eigen::VectorXd y, f, labels;

  explicit LossFixture(int64_t n) : proj(make_proj(n)) {
    anchor::Rng rng(3);
    y.resize(n);
    f.resize(n);
    labels.resize(n);
    for (int64_t i = 0; i < n; ++i) {
      y[i] = rng.normal();
      f[i] = rng.normal();
      labels[i] = rng.below(2) ? 1.0 : -1.0;
    }
  }
  static anchor::ProjectionOperator make_proj(int64_t n) {
    anchor::Rng rng(4);
    std::vector<int32_t> env(n);
    for (int64_t i = 0; i < n; ++i) env[i] = static_cast<int32_t>(i < 6 ? i : rng.below(6));
    return anchor::ProjectionOperator::group_mean(env, 6);
  }
};

void BM_RegressionLoss(benchmark::State& state) {
  const LossFixture fx(state.range(0));
  const anchor::AnchorLossSpec spec{4.0, anchor::Link::identity, &fx.proj};
  for (auto _ : state) {
    benchmark::DoNotOptimize(anchor::regression_loss(fx.f, fx.y, spec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RegressionLoss)->Arg(100000)->Arg(1000000);

void BM_ProbitLoss(benchmark::State& state) {
  const LossFixture fx(state.range(0));
  const anchor::AnchorLossSpec spec{4.0, anchor::Link::probit, &fx.proj};
  for (auto _ : state) {
    benchmark::DoNotOptimize(anchor::probit_loss(fx.f, fx.labels, spec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ProbitLoss)->Arg(100000)->Arg(1000000);

}  // namespace
