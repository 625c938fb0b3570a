#pragma once

#include <Eigen/Core>
#include <vector>

#include "anchor/projection.hpp"

namespace anchor {

enum class Link { identity, probit, logistic_diagnostic };

Link link_from_string(const std::string& s);
std::string link_to_string(Link link);

struct AnchorLossSpec {
  double gamma = 1.0;  // >= 1
  Link link = Link::identity;
  const ProjectionOperator* projection = nullptr;
};

// Value, gradient and factored Hessian of an anchor loss at scores f:
//   H = diag(hessian_diag) + (gamma-1) diag(anchor_weight) P diag(anchor_weight)
// For gamma = 1 the anchor part is exactly zero and only the diagonal is set.
struct LossEvaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;   // d loss / d f
  Eigen::VectorXd residuals;  // y - f (identity) or score residuals r(f) (probit)
  Eigen::VectorXd projected_residuals;  // P_A residuals; empty when gamma = 1
  Eigen::VectorXd hessian_diag;
  Eigen::VectorXd anchor_weight;  // ones for identity, r'(f) for probit
  double gamma_minus_one = 0.0;
  const ProjectionOperator* projection = nullptr;

  Eigen::VectorXd hessian_vector_product(const Eigen::VectorXd& v) const;
};

// 1/2 ||y - f||^2 + 1/2 (gamma-1) ||P_A (y - f)||^2
LossEvaluation regression_loss(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                               const AnchorLossSpec& spec);

// -sum log Phi(y f) + 1/2 (gamma-1) ||P_A r(f)||^2 with score residuals
// r(f) = -y phi(f) / Phi(y f). Labels must lie in {-1, +1}.
LossEvaluation probit_loss(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                           const AnchorLossSpec& spec);

LossEvaluation evaluate_loss(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                             const AnchorLossSpec& spec);

// Single-observation anchor loss on a score grid (P_A = identity for n = 1).
// The logistic link is exposed only here, as a convexity diagnostic.
std::vector<double> single_observation_loss_curve(Link link, double gamma, double y,
                                                  const std::vector<double>& f_grid);

}  // namespace anchor
