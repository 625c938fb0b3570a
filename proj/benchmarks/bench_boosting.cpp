#include <benchmark/benchmark.h>

#include "anchor/boosting.hpp"
#include "anchor/rng.hpp"
#include "anchor/scm.hpp"

namespace {

anchor::AnchorSCM wide_scm(int p) {
  anchor::AnchorSCM scm = anchor::canonical_scm();
  scm.n_features = p;
  anchor::Rng rng(7);
  scm.env_feature_offsets.resize(p, scm.n_envs);
  scm.hidden_to_features.resize(p, scm.n_hidden);
  scm.causal_coef.resize(p);
  for (int i = 0; i < p; ++i) {
    for (int e = 0; e < scm.n_envs; ++e) scm.env_feature_offsets(i, e) = rng.normal();
    for (int q = 0; q < scm.n_hidden; ++q) scm.hidden_to_features(i, q) = rng.normal();
    scm.causal_coef[i] = 0.3 * rng.normal();
  }
  return scm;
}

void BM_FeatureBinning(benchmark::State& state) {
  const anchor::Dataset d = anchor::generate(wide_scm(20), state.range(0), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(anchor::FeatureBins(d.features, 255));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 20);
}
BENCHMARK(BM_FeatureBinning)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_BoostingRound(benchmark::State& state) {
  const int64_t n = state.range(0);
  const anchor::Dataset d = anchor::generate(wide_scm(20), n, 1.0);
  anchor::BoostConfig config;
  config.num_trees = 1;
  config.gamma = 4.0;
  const anchor::FeatureBins bins(d.features, config.histogram_bins);
  const anchor::ProjectionOperator proj = anchor::ProjectionOperator::build(d.anchor);
  const anchor::AnchorLossSpec spec{config.gamma, anchor::Link::identity, &proj};
  const Eigen::VectorXd f = Eigen::VectorXd::Constant(n, d.outcome.mean());
  const anchor::LossEvaluation ev = anchor::regression_loss(f, d.outcome, spec);
  for (auto _ : state) {
    auto [tree, assign] = anchor::grow_tree_binned(bins, -ev.gradient, config);
    benchmark::DoNotOptimize(anchor::solve_leaf_values(assign, ev));
  }
  state.SetItemsProcessed(state.iterations() * n * 20);
}
BENCHMARK(BM_BoostingRound)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace
