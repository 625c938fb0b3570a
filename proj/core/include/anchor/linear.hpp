#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "anchor/dataset.hpp"
#include "anchor/loss.hpp"

namespace anchor {

struct ElasticNetSpec {
  double lambda = 0.0;  // overall penalty, >= 0
  double eta = 1.0;     // l1 mix in [0, 1]; 1 = lasso, 0 = ridge
};

enum class FitStatus { converged, iteration_limit, coefficient_cap };

struct FitDiagnostics {
  FitStatus status = FitStatus::converged;
  int64_t iterations = 0;
  double last_delta = 0.0;
};

// Linear anchor regression / probit classification model. Coefficients are
// reported on the original feature scale; `feature_mean`/`feature_scale`
// record the internal standardization used during fitting.
struct LinearAnchorModel {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  double gamma = 1.0;
  ElasticNetSpec enet;
  std::vector<std::string> feature_names;
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  Task task = Task::regression;
  FitDiagnostics diag;

  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;
  // Validates that the dataset's columns match feature_names.
  Eigen::VectorXd predict(const Dataset& d) const;
  // Phi(score); classification models only.
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& features) const;
};

// Minimizes  ||y - Xb||^2 + (gamma-1) ||P_A (y - Xb)||^2  plus the elastic
// net penalty, through the transformation W = Id + (sqrt(gamma)-1) P_A and
// cyclic coordinate descent on (W Xc, W yc) with centered, standardized
// features. The intercept is unpenalized and fit on untransformed means.
LinearAnchorModel fit_linear_anchor(const Dataset& d, double gamma, ElasticNetSpec enet);

// Probit negative log-likelihood + 1/2 (gamma-1) ||P_A r(f)||^2 plus elastic
// net, by proximal Newton with the factored anchor Hessian.
LinearAnchorModel fit_linear_anchor_classification(const Dataset& d, double gamma,
                                                   ElasticNetSpec enet);

// Smallest lambda for which the lasso (eta = gamma = 1) has all-zero
// coefficients: max_j |<x_j_centered, y - mean(y)>| / n on standardized
// features.
double lambda_max(const Dataset& d);

// Target-domain refit with a quadratic prior centered at the source
// coefficients:  sum_i (y_i - X_i b)^2 + alpha ||b - b_source||^2  plus the
// elastic net term, intercept refit without prior shrinkage. Classification
// sources use the probit negative log-likelihood in place of squared error.
LinearAnchorModel refit_empirical_bayes(const LinearAnchorModel& source, const Dataset& target,
                                        double alpha, ElasticNetSpec enet);

std::string linear_model_to_json(const LinearAnchorModel& m);
LinearAnchorModel linear_model_from_json(const std::string& text);
void save_linear_model(const LinearAnchorModel& m, const std::string& path);
LinearAnchorModel load_linear_model(const std::string& path);

}  // namespace anchor
