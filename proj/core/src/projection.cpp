#include "anchor/projection.hpp"

#include "anchor/errors.hpp"

namespace anchor {

ProjectionOperator ProjectionOperator::group_mean(std::vector<int32_t> env, int n_envs) {
  if (env.empty()) throw data_error("projection: zero-row input");
  ProjectionOperator op;
  op.group_mean_ = true;
  op.n_ = static_cast<int64_t>(env.size());
  op.counts_.assign(n_envs, 0);
  for (int32_t e : env) {
    if (e < 0 || e >= n_envs) throw data_error("projection: environment index out of range");
    ++op.counts_[e];
  }
  op.env_ = std::move(env);
  return op;
}

ProjectionOperator ProjectionOperator::orthonormal(const Eigen::MatrixXd& anchor_columns) {
  const int64_t n = anchor_columns.rows();
  if (n == 0) throw data_error("projection: zero-row input");
  Eigen::MatrixXd m(n, anchor_columns.cols() + 1);
  m.col(0).setOnes();
  m.rightCols(anchor_columns.cols()) = anchor_columns;

  double max_norm = 0.0;
  for (int64_t j = 0; j < m.cols(); ++j) max_norm = std::max(max_norm, m.col(j).norm());
  const double tol = 1e-8 * max_norm;

  ProjectionOperator op;
  op.n_ = n;
  op.basis_.resize(n, m.cols());
  int r = 0;
  for (int64_t j = 0; j < m.cols(); ++j) {
    Eigen::VectorXd v = m.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (int q = 0; q < r; ++q) v -= op.basis_.col(q) * op.basis_.col(q).dot(v);
    }
    const double norm = v.norm();
    if (norm >= tol && norm > 0.0) {
      op.basis_.col(r) = v / norm;
      ++r;
    }
  }
  op.basis_.conservativeResize(n, r);
  return op;
}

ProjectionOperator ProjectionOperator::build(const AnchorSpec& a) {
  if (const auto* disc = std::get_if<DiscreteAnchor>(&a)) {
    return group_mean(disc->env, static_cast<int>(disc->labels.size()));
  }
  return orthonormal(std::get<ContinuousAnchor>(a).columns);
}

int ProjectionOperator::rank() const {
  return group_mean_ ? n_envs() : static_cast<int>(basis_.cols());
}

Eigen::VectorXd ProjectionOperator::apply(const Eigen::VectorXd& v) const {
  if (v.size() != n_) throw data_error("projection: vector length does not match rows");
  if (group_mean_) {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(n_envs());
    for (int64_t i = 0; i < n_; ++i) sums[env_[i]] += v[i];
    for (int e = 0; e < n_envs(); ++e) sums[e] /= static_cast<double>(counts_[e]);
    Eigen::VectorXd out(n_);
    for (int64_t i = 0; i < n_; ++i) out[i] = sums[env_[i]];
    return out;
  }
  return basis_ * (basis_.transpose() * v);
}

Eigen::MatrixXd ProjectionOperator::apply_columns(const Eigen::MatrixXd& m) const {
  if (m.rows() != n_) throw data_error("projection: matrix rows do not match");
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int64_t j = 0; j < m.cols(); ++j) out.col(j) = apply(m.col(j));
  return out;
}

}  // namespace anchor
