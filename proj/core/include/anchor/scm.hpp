#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "anchor/dataset.hpp"

namespace anchor {

// Linear structural causal model with exogenous discrete environments A and
// hidden confounders H:
//   X = shift_scale * M_AX a_e + M_HX H + feature_noise * eps_X
//   Y = beta_causal^T X + shift_scale * m_AY[e] + m_HY^T H + outcome_noise * eps_Y
// Classification thresholds the latent Y at 0 into {-1, +1} (probit
// compatible). All draws are deterministic given the seed.
struct AnchorSCM {
  int n_envs = 3;
  int n_hidden = 1;
  int n_features = 5;
  Eigen::MatrixXd env_feature_offsets;  // p x E  (M_AX)
  Eigen::VectorXd env_outcome_offsets;  // E      (m_AY)
  Eigen::MatrixXd hidden_to_features;   // p x q  (M_HX)
  Eigen::VectorXd hidden_to_outcome;    // q      (m_HY)
  Eigen::VectorXd causal_coef;          // p      (beta_causal)
  double feature_noise = 1.0;
  double outcome_noise = 1.0;
  uint64_t seed = 0;
  Task task = Task::regression;
};

void validate_scm(const AnchorSCM& scm);

// The frozen desk-scale SCM backing the test suites: 3 environments, 1
// hidden confounder, 5 features, coefficients drawn once from a fixed seed.
AnchorSCM canonical_scm(Task task = Task::regression);

// Confounded just-identified instrumental-variable system: 2 features, 3
// environments, no direct anchor-to-outcome path.
AnchorSCM just_identified_iv_scm();

Dataset generate(const AnchorSCM& scm, int64_t n, double shift_scale);
Dataset generate_seeded(const AnchorSCM& scm, int64_t n, double shift_scale, uint64_t seed);

struct WorstCaseRisk {
  std::vector<double> shift_scales;
  std::vector<double> mse;
  double max_mse = 0.0;
};

using Predictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

// Evaluates a predictor's MSE on freshly generated test sets, one per shift
// scale, and reports the profile and its maximum.
WorstCaseRisk worst_case_risk(const Predictor& predict, const AnchorSCM& scm,
                              const std::vector<double>& shift_scales, int64_t n_test);

std::string scm_to_json(const AnchorSCM& scm);
AnchorSCM scm_from_json(const std::string& text);
void save_scm(const AnchorSCM& scm, const std::string& path);
AnchorSCM load_scm(const std::string& path);

}  // namespace anchor
