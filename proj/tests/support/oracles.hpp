#pragma once

// Independent reference implementations used to verify the library. These
// deliberately use dense matrices and direct solves; they must never share a
// code path with what they check.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "anchor/boosting.hpp"
#include "anchor/dataset.hpp"

namespace oracle {

// Dense P = A (A^T A)^+ A^T via a rank-revealing decomposition.
Eigen::MatrixXd dense_projection(const Eigen::MatrixXd& a);

Eigen::MatrixXd onehot(const std::vector<int32_t>& env, int n_envs);

// Minimizer of ||y - Xb - c||^2 + (gamma-1) ||P (y - Xb - c)||^2 with an
// unpenalized intercept, solved through dense normal equations.
struct LinearSolution {
  Eigen::VectorXd beta;
  double intercept;
};
LinearSolution anchor_normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                       const Eigen::MatrixXd& p_dense, double gamma);

// Two-stage least squares with environment dummies as instruments.
struct TslsSolution {
  Eigen::VectorXd beta;
  double intercept;
  Eigen::VectorXd se;  // classical standard errors for beta
};
TslsSolution tsls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                  const std::vector<int32_t>& env, int n_envs);

// Central finite differences of a scalar function of a vector.
Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& fn,
                                           const Eigen::VectorXd& at, double step);

// Derivative-free cyclic coordinate minimization with exact parabolic line
// steps; exact line minimization for quadratics, so it converges to the
// global optimum of the leaf-value subproblem.
Eigen::VectorXd minimize_coordinatewise(const std::function<double(const Eigen::VectorXd&)>& fn,
                                        Eigen::VectorXd start, int sweeps = 4000,
                                        double tol = 1e-12);

// Plain probit regression (no penalty) by dense Newton iteration.
struct ProbitSolution {
  Eigen::VectorXd beta;
  double intercept;
};
ProbitSolution plain_probit_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Reference second-order gradient boosting with gamma fixed to 1 and dense
// leaf mathematics; shares only the tree-growth rules with the library.
// Returns training-set predictions after each round.
std::vector<Eigen::VectorXd> reference_boost_gamma1(const anchor::Dataset& d,
                                                    const anchor::BoostConfig& config);

// Average precision by exhaustive threshold enumeration, O(n^2).
double average_precision_enumeration(const Eigen::VectorXd& scores,
                                     const Eigen::VectorXd& labels);

}  // namespace oracle
