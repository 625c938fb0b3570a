#include <doctest.h>

#include <Eigen/Dense>

#include "anchor/errors.hpp"
#include "anchor/projection.hpp"
#include "anchor/rng.hpp"
#include "support/oracles.hpp"

using namespace anchor;

namespace {

Eigen::VectorXd random_vector(Rng& rng, int64_t n) {
  Eigen::VectorXd v(n);
  for (int64_t i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

TEST_SUITE("projection") {

TEST_CASE("group means replace entries by environment means") {
  const ProjectionOperator op = ProjectionOperator::group_mean({0, 0, 1}, 2);
  Eigen::VectorXd v(3);
  v << 1, 3, 5;
  const Eigen::VectorXd pv = op.apply(v);
  CHECK(pv[0] == doctest::Approx(2.0));
  CHECK(pv[1] == doctest::Approx(2.0));
  CHECK(pv[2] == doctest::Approx(5.0));

  Eigen::VectorXd w(4);
  w << 1, -1, 2, 4;
  const ProjectionOperator op2 = ProjectionOperator::group_mean({0, 0, 1, 1}, 2);
  const Eigen::VectorXd pw = op2.apply(w);
  CHECK(pw[0] == doctest::Approx(0.0));
  CHECK(pw[1] == doctest::Approx(0.0));
  CHECK(pw[2] == doctest::Approx(3.0));
  CHECK(pw[3] == doctest::Approx(3.0));
}

TEST_CASE("constant continuous anchor projects onto the mean") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(5, 1, 3.0);
  const ProjectionOperator op = ProjectionOperator::orthonormal(a);
  CHECK(op.rank() == 1);  // duplicate of the intercept column is dropped
  Rng rng(71);
  const Eigen::VectorXd v = random_vector(rng, 5);
  const Eigen::VectorXd pv = op.apply(v);
  for (int i = 0; i < 5; ++i) CHECK(pv[i] == doctest::Approx(v.mean()).epsilon(1e-12));
}

TEST_CASE("continuous path matches the dense normal-equations projector") {
  Rng rng(1234);
  Eigen::MatrixXd a(6, 2);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = rng.normal();
  const ProjectionOperator op = ProjectionOperator::orthonormal(a);

  Eigen::MatrixXd augmented(6, 3);
  augmented.col(0).setOnes();
  augmented.rightCols(2) = a;
  const Eigen::MatrixXd p_dense = oracle::dense_projection(augmented);

  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd v = random_vector(rng, 6);
    CHECK((op.apply(v) - p_dense * v).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("idempotent, symmetric, contraction") {
  Rng rng(99);
  std::vector<int32_t> env;
  for (int i = 0; i < 40; ++i) env.push_back(static_cast<int32_t>(rng.below(3)));
  env[0] = 0; env[1] = 1; env[2] = 2;
  const ProjectionOperator gm = ProjectionOperator::group_mean(env, 3);

  Eigen::MatrixXd a(40, 2);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = rng.normal();
  const ProjectionOperator gen = ProjectionOperator::orthonormal(a);

  for (const ProjectionOperator* op : {&gm, &gen}) {
    for (int rep = 0; rep < 4; ++rep) {
      const Eigen::VectorXd u = random_vector(rng, 40);
      const Eigen::VectorXd v = random_vector(rng, 40);
      const Eigen::VectorXd pu = op->apply(u);
      CHECK((op->apply(pu) - pu).norm() <= 1e-10 * std::max(1.0, pu.norm()));
      CHECK(pu.dot(v) == doctest::Approx(u.dot(op->apply(v))).epsilon(1e-10));
      CHECK(pu.norm() <= u.norm() * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("one-hot continuous anchors agree with the group-mean fast path") {
  Rng rng(5);
  std::vector<int32_t> env;
  for (int i = 0; i < 30; ++i) env.push_back(static_cast<int32_t>(rng.below(4)));
  for (int e = 0; e < 4; ++e) env[e] = e;
  const ProjectionOperator gm = ProjectionOperator::group_mean(env, 4);
  const ProjectionOperator gen = ProjectionOperator::orthonormal(oracle::onehot(env, 4));
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd v = random_vector(rng, 30);
    CHECK((gm.apply(v) - gen.apply(v)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("group-mean penalty equals the per-environment mean-residual form") {
  Rng rng(17);
  std::vector<int32_t> env;
  for (int i = 0; i < 25; ++i) env.push_back(static_cast<int32_t>(rng.below(3)));
  for (int e = 0; e < 3; ++e) env[e] = e;
  const ProjectionOperator op = ProjectionOperator::group_mean(env, 3);
  const Eigen::VectorXd r = random_vector(rng, 25);
  const double lhs = op.apply(r).squaredNorm();
  double rhs = 0.0;
  for (int e = 0; e < 3; ++e) {
    double sum = 0.0;
    int64_t count = 0;
    for (int i = 0; i < 25; ++i) {
      if (env[i] == e) {
        sum += r[i];
        ++count;
      }
    }
    rhs += sum * sum / static_cast<double>(count);
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("vector in the anchor span is fixed, orthogonal complement maps to zero") {
  const ProjectionOperator op = ProjectionOperator::group_mean({0, 0, 1, 1}, 2);
  Eigen::VectorXd in_span(4);
  in_span << 2, 2, -3, -3;
  CHECK((op.apply(in_span) - in_span).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::VectorXd orth(4);
  orth << 1, -1, 2, -2;
  CHECK(op.apply(orth).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rank-deficient columns are dropped deterministically left to right") {
  Eigen::MatrixXd a(6, 3);
  Rng rng(3);
  for (int i = 0; i < 6; ++i) a(i, 0) = rng.normal();
  a.col(1) = 2.0 * a.col(0);  // redundant
  for (int i = 0; i < 6; ++i) a(i, 2) = rng.normal();
  const ProjectionOperator op = ProjectionOperator::orthonormal(a);
  CHECK(op.rank() == 3);  // intercept + col0 + col2; col1 dropped
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(ProjectionOperator::group_mean({}, 0), data_error);
  CHECK_THROWS_AS(ProjectionOperator::orthonormal(Eigen::MatrixXd(0, 1)), data_error);
  const ProjectionOperator op = ProjectionOperator::group_mean({0, 1}, 2);
  CHECK_THROWS_AS(op.apply(Eigen::VectorXd::Zero(3)), data_error);
}

}  // TEST_SUITE
