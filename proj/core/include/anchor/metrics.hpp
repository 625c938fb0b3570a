#pragma once

#include <Eigen/Core>
#include <string>

namespace anchor {

struct MetricReport {
  std::string metric;  // "mse" | "nll" | "auprc"
  double value = 0.0;
  int64_t n = 0;
};

double mse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& outcomes);

// Mean probit negative log-likelihood -log Phi(y f), labels in {-1, +1}.
double probit_nll(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

// Step-wise average precision with tied scores grouped; no interpolation.
// Requires at least one positive label.
double auprc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

}  // namespace anchor
