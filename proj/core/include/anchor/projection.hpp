#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "anchor/dataset.hpp"

namespace anchor {

// The projection P_A onto the anchor design's column space, stored factored:
// either a per-environment group-mean map (discrete anchors) or an
// orthonormal basis Q with P = Q Q^T (continuous anchors). Never an n x n
// matrix. Immutable after construction; apply() is safe to call concurrently.
class ProjectionOperator {
 public:
  static ProjectionOperator build(const AnchorSpec& a);
  static ProjectionOperator group_mean(std::vector<int32_t> env, int n_envs);
  // Orthonormalizes [1, A]; the intercept column is prepended so that a
  // constant anchor and the single-environment discrete case coincide.
  // Directions with post-orthogonalization norm below 1e-8 x the largest
  // column norm are dropped, scanning columns left to right.
  static ProjectionOperator orthonormal(const Eigen::MatrixXd& anchor_columns);

  int64_t rows() const { return n_; }
  bool is_group_mean() const { return group_mean_; }
  int n_envs() const { return static_cast<int>(counts_.size()); }
  const std::vector<int32_t>& env() const { return env_; }
  const std::vector<int64_t>& env_counts() const { return counts_; }
  const Eigen::MatrixXd& basis() const { return basis_; }  // n x rank
  int rank() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& m) const;

 private:
  ProjectionOperator() = default;

  bool group_mean_ = false;
  int64_t n_ = 0;
  std::vector<int32_t> env_;
  std::vector<int64_t> counts_;
  Eigen::MatrixXd basis_;
};

}  // namespace anchor
