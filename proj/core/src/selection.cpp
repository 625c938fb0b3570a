#include "anchor/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "anchor/errors.hpp"
#include "anchor/metrics.hpp"
#include "anchor/parallel.hpp"

namespace anchor {

std::vector<double> default_gamma_grid(int n) {
  std::vector<double> grid;
  double g = 1.0;
  for (int i = 0; i < n; ++i) {
    grid.push_back(g);
    g *= 2.0;
  }
  return grid;
}

std::vector<double> default_dr_grid() { return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}; }

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int e = 2; e >= -6; --e) grid.push_back(std::pow(10.0, 0.5 * e));
  return grid;  // 10, sqrt(10), ..., 1e-3
}

LoeoResult loeo_select_gamma(const Dataset& d, const std::vector<double>& gamma_grid,
                             const GammaTrainer& trainer) {
  if (gamma_grid.empty()) throw config_error("gamma grid is empty");
  const auto* disc = std::get_if<DiscreteAnchor>(&d.anchor);
  if (!disc) throw data_error("LOEO-CV requires a discrete anchor");
  const int n_envs = static_cast<int>(disc->labels.size());
  if (n_envs < 2) throw data_error("LOEO-CV requires at least 2 environments");
  const std::string metric = d.task == Task::regression ? "mse" : "nll";

  LoeoResult result;
  result.table.resize(gamma_grid.size() * n_envs);
  parallel_jobs(static_cast<int64_t>(result.table.size()), [&](int64_t job) {
    const size_t gi = static_cast<size_t>(job) / n_envs;
    const int e = static_cast<int>(job % n_envs);
    const double gamma = gamma_grid[gi];
    auto [train, test] = split_by_environment(d, disc->labels[e]);
    const Eigen::VectorXd scores = trainer(train, gamma, test);
    LoeoRow row;
    row.gamma = gamma;
    row.holdout_env = disc->labels[e];
    row.metric = metric;
    row.n = test.n_rows();
    row.value = d.task == Task::regression ? mse(scores, test.outcome)
                                           : probit_nll(scores, test.outcome);
    result.table[job] = std::move(row);
  });

  double best_score = std::numeric_limits<double>::infinity();
  result.selected_gamma = gamma_grid.front();
  for (size_t gi = 0; gi < gamma_grid.size(); ++gi) {
    double mean = 0.0;
    for (int e = 0; e < n_envs; ++e) mean += result.table[gi * n_envs + e].value;
    mean /= n_envs;
    if (mean < best_score) {
      best_score = mean;
      result.selected_gamma = gamma_grid[gi];
    }
  }
  return result;
}

std::vector<int> kfold_assignment(const Dataset& d, int k) {
  if (k < 2) throw config_error("k-fold CV requires k >= 2");
  const int64_t n = d.n_rows();
  if (n < k) throw data_error("k-fold CV: n = " + std::to_string(n) + " rows < k = " +
                              std::to_string(k));
  std::vector<int> fold(n);
  if (d.has_groups()) {
    // Units are groups in order of first appearance.
    std::vector<int64_t> unit_fold_of_group;
    std::unordered_map<int64_t, int> fold_of_group;
    int64_t next_unit = 0;
    for (int64_t i = 0; i < n; ++i) {
      auto [it, inserted] = fold_of_group.emplace(d.groups[i], 0);
      if (inserted) it->second = static_cast<int>(next_unit++ % k);
      fold[i] = it->second;
    }
    if (next_unit < k)
      throw data_error("k-fold CV: " + std::to_string(next_unit) + " groups < k = " +
                       std::to_string(k));
  } else {
    for (int64_t i = 0; i < n; ++i) fold[i] = static_cast<int>(i % k);
  }
  return fold;
}

KfoldSelection kfold_refit_select(const std::vector<RefitCandidate>& candidates,
                                  const Dataset& target, int k, const RefitEvaluator& evaluate) {
  if (candidates.empty()) throw config_error("candidate grid is empty");
  const std::vector<int> fold = kfold_assignment(target, k);
  const std::string metric = target.task == Task::regression ? "mse" : "nll";

  std::vector<std::vector<int64_t>> fold_rows(k), fold_rest(k);
  for (int64_t i = 0; i < target.n_rows(); ++i) {
    for (int f = 0; f < k; ++f)
      (fold[i] == f ? fold_rows[f] : fold_rest[f]).push_back(i);
  }
  std::vector<Dataset> tests, trains;
  for (int f = 0; f < k; ++f) {
    tests.push_back(subset_rows(target, fold_rows[f]));
    trains.push_back(subset_rows(target, fold_rest[f]));
  }

  KfoldSelection sel;
  sel.table.resize(candidates.size() * k);
  parallel_jobs(static_cast<int64_t>(sel.table.size()), [&](int64_t job) {
    const size_t ci = static_cast<size_t>(job) / k;
    const int f = static_cast<int>(job % k);
    const Eigen::VectorXd scores = evaluate(candidates[ci], trains[f], tests[f]);
    KfoldRow row;
    row.candidate = candidates[ci];
    row.fold = f;
    row.n = tests[f].n_rows();
    row.value = target.task == Task::regression ? mse(scores, tests[f].outcome)
                                                : probit_nll(scores, tests[f].outcome);
    sel.table[job] = std::move(row);
  });

  double best = std::numeric_limits<double>::infinity();
  size_t best_i = 0;
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    double mean = 0.0;
    for (int f = 0; f < k; ++f) mean += sel.table[ci * k + f].value;
    mean /= k;
    const bool better =
        mean < best ||
        (mean == best && (candidates[ci].param > candidates[best_i].param ||
                          (candidates[ci].param == candidates[best_i].param &&
                           candidates[ci].gamma < candidates[best_i].gamma)));
    if (better) {
      best = mean;
      best_i = ci;
    }
  }
  sel.selected = candidates[best_i];
  sel.cv_score = best;
  return sel;
}

}  // namespace anchor
