#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "anchor/dataset.hpp"

namespace anchor {

struct CVGrid {
  std::vector<double> gamma_grid;
  std::vector<double> dr_grid;
  std::vector<double> alpha_grid;
  std::vector<double> lambda_grid;
  std::vector<double> eta_grid;
};

// Default grids following the refit experiments: gamma in {1, 2, 4, ...},
// dr in {0, 0.2, ..., 1}, alpha in {10, sqrt(10), ..., 1e-3}.
std::vector<double> default_gamma_grid(int n = 5);
std::vector<double> default_dr_grid();
std::vector<double> default_alpha_grid();

struct LoeoRow {
  double gamma = 1.0;
  std::string holdout_env;
  std::string metric;
  double value = 0.0;
  int64_t n = 0;
};

struct LoeoResult {
  double selected_gamma = 1.0;
  std::vector<LoeoRow> table;  // |grid| x |envs| rows, grid-major
};

// Trains on `train` with the given gamma and returns predicted scores on
// `test`.
using GammaTrainer =
    std::function<Eigen::VectorXd(const Dataset& train, double gamma, const Dataset& test)>;

// Leave-one-environment-out selection of gamma: for each grid value and each
// held-out environment, train on the rest and score the holdout (MSE for
// regression, probit NLL for classification). Picks the gamma minimizing the
// unweighted mean across environments; ties break toward smaller gamma.
LoeoResult loeo_select_gamma(const Dataset& d, const std::vector<double>& gamma_grid,
                             const GammaTrainer& trainer);

// Fold id per row for k-fold CV: round-robin over sampling units (groups
// when present, rows otherwise).
std::vector<int> kfold_assignment(const Dataset& d, int k);

struct RefitCandidate {
  double gamma = 1.0;
  double param = 0.0;  // decay rate or prior width alpha
};

struct KfoldRow {
  RefitCandidate candidate;
  int fold = 0;
  double value = 0.0;
  int64_t n = 0;
};

struct KfoldSelection {
  RefitCandidate selected;
  double cv_score = 0.0;
  std::vector<KfoldRow> table;
};

// Refits under a candidate on the fold-train rows and returns scores on the
// fold-test rows.
using RefitEvaluator = std::function<Eigen::VectorXd(
    const RefitCandidate& candidate, const Dataset& fold_train, const Dataset& fold_test)>;

// Joint (gamma, dr) or (gamma, alpha) selection by k-fold CV on the target.
// Ties break toward the larger second parameter (more shrinkage to the
// source model), then toward smaller gamma.
KfoldSelection kfold_refit_select(const std::vector<RefitCandidate>& candidates,
                                  const Dataset& target, int k, const RefitEvaluator& evaluate);

}  // namespace anchor
