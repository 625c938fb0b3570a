#include <doctest.h>

#include <cmath>

#include "anchor/errors.hpp"
#include "anchor/linear.hpp"
#include "anchor/scm.hpp"
#include "anchor/selection.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace anchor;

namespace {

Eigen::MatrixXd dense_projection_of(const Dataset& d) {
  const auto& disc = std::get<DiscreteAnchor>(d.anchor);
  return oracle::dense_projection(
      oracle::onehot(disc.env, static_cast<int>(disc.labels.size())));
}

double anchor_objective(const Dataset& d, const Eigen::MatrixXd& p_dense, double gamma,
                        const Eigen::VectorXd& beta, double intercept) {
  const Eigen::VectorXd r =
      d.outcome - d.features * beta - Eigen::VectorXd::Constant(d.n_rows(), intercept);
  return r.squaredNorm() + (gamma - 1.0) * (p_dense * r).squaredNorm();
}

}  // namespace

TEST_SUITE("linear") {

TEST_CASE("gamma=1, lambda=0 equals ordinary least squares") {
  const Dataset d = testutil::random_dataset(50, 3, 2, 42);
  const LinearAnchorModel m = fit_linear_anchor(d, 1.0, {0.0, 1.0});
  const Eigen::MatrixXd p_dense = dense_projection_of(d);
  const auto sol = oracle::anchor_normal_equations(d.features, d.outcome, p_dense, 1.0);
  CHECK((m.beta - sol.beta).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(m.intercept == doctest::Approx(sol.intercept).epsilon(1e-8));
}

TEST_CASE("gamma=2 matches the dense normal-equations oracle") {
  const Dataset d = testutil::random_dataset(20, 2, 2, 43);
  const LinearAnchorModel m = fit_linear_anchor(d, 2.0, {0.0, 1.0});
  const auto sol =
      oracle::anchor_normal_equations(d.features, d.outcome, dense_projection_of(d), 2.0);
  CHECK((m.beta - sol.beta).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(m.intercept == doctest::Approx(sol.intercept).epsilon(1e-8));
}

TEST_CASE("W-transformed solution matches the direct minimizer across gamma") {
  for (double gamma : {1.0, 2.0, 4.0, 16.0}) {
    const Dataset d = testutil::random_dataset(40, 3, 3, 44 + static_cast<uint64_t>(gamma));
    const LinearAnchorModel m = fit_linear_anchor(d, gamma, {0.0, 1.0});
    const auto sol =
        oracle::anchor_normal_equations(d.features, d.outcome, dense_projection_of(d), gamma);
    CHECK((m.beta - sol.beta).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("anchor penalty is non-increasing in gamma") {
  const Dataset d = testutil::random_dataset(80, 4, 3, 45);
  const Eigen::MatrixXd p_dense = dense_projection_of(d);
  double prev = std::numeric_limits<double>::infinity();
  for (double gamma : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const LinearAnchorModel m = fit_linear_anchor(d, gamma, {0.0, 1.0});
    const Eigen::VectorXd r = d.outcome - m.predict(d.features);
    const double penalty = (p_dense * r).squaredNorm();
    CHECK(penalty <= prev * (1.0 + 1e-9) + 1e-12);
    prev = penalty;
  }
}

TEST_CASE("gamma 1e6 approaches two-stage least squares on a just-identified system") {
  const AnchorSCM scm = just_identified_iv_scm();
  const Dataset d = generate(scm, 4000, 1.0);
  const auto& disc = std::get<DiscreteAnchor>(d.anchor);
  const auto iv = oracle::tsls(d.features, d.outcome, disc.env, 3);
  const LinearAnchorModel m = fit_linear_anchor(d, 1e6, {0.0, 1.0});
  CHECK((m.beta - iv.beta).cwiseAbs().maxCoeff() < 1e-2);
  // And it is far from OLS, so the limit is informative.
  const LinearAnchorModel ols = fit_linear_anchor(d, 1.0, {0.0, 1.0});
  CHECK((ols.beta - iv.beta).cwiseAbs().maxCoeff() > 5e-2);
}

TEST_CASE("lambda_max returns zero for a constant outcome") {
  Dataset d = testutil::random_dataset(30, 3, 2, 46);
  d.outcome.setConstant(2.5);
  CHECK(lambda_max(d) == 0.0);
}

TEST_CASE("lambda_max definition on a single standardized feature") {
  Dataset d = testutil::random_dataset(200, 1, 1, 47);
  // Build y so that <x_std, y - mean(y)> / n = 0.7 exactly.
  Eigen::VectorXd x = d.features.col(0);
  const double mean = x.mean();
  const double scale = std::sqrt((x.array() - mean).square().mean());
  Eigen::VectorXd xs = (x.array() - mean) / scale;
  d.outcome = 0.7 * xs * static_cast<double>(d.n_rows()) / xs.squaredNorm();
  CHECK(lambda_max(d) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("lasso at lambda_max is all-zero; two decades below is not") {
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const Dataset d = testutil::random_dataset(100, 5, 2, 400 + seed);
    const double lmax = lambda_max(d);
    const LinearAnchorModel at_max = fit_linear_anchor(d, 1.0, {lmax, 1.0});
    CHECK(at_max.beta.cwiseAbs().maxCoeff() == 0.0);
    const LinearAnchorModel below = fit_linear_anchor(d, 1.0, {lmax / 100.0, 1.0});
    CHECK(below.beta.cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("invalid hyperparameters are rejected") {
  const Dataset d = testutil::random_dataset(20, 2, 2, 48);
  CHECK_THROWS_AS(fit_linear_anchor(d, 0.5, {0.0, 1.0}), config_error);
  CHECK_THROWS_AS(fit_linear_anchor(d, 1.0, {-1.0, 1.0}), config_error);
  CHECK_THROWS_AS(fit_linear_anchor(d, 1.0, {0.0, 2.0}), config_error);
  Dataset c = d;
  c.task = Task::classification;
  CHECK_THROWS_AS(fit_linear_anchor(c, 1.0, {0.0, 1.0}), config_error);
}

TEST_CASE("probit classification at gamma=1 matches a plain probit fit") {
  const Dataset d = generate(canonical_scm(Task::classification), 400, 1.0);
  const LinearAnchorModel m = fit_linear_anchor_classification(d, 1.0, {0.0, 1.0});
  const auto ref = oracle::plain_probit_fit(d.features, d.outcome);
  CHECK((m.beta - ref.beta).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(m.intercept == doctest::Approx(ref.intercept).epsilon(1e-4));
}

TEST_CASE("separable data terminates with a diagnostic, never NaN") {
  Dataset d;
  d.task = Task::classification;
  const int64_t n = 40;
  d.features.resize(n, 1);
  d.outcome.resize(n);
  for (int64_t i = 0; i < n; ++i) {
    d.features(i, 0) = static_cast<double>(i) - n / 2 + 0.5;
    d.outcome[i] = d.features(i, 0) > 0 ? 1.0 : -1.0;
  }
  d.column_names = {"x1"};
  DiscreteAnchor disc;
  disc.labels = {"a"};
  disc.env.assign(n, 0);
  d.anchor = std::move(disc);

  const LinearAnchorModel m = fit_linear_anchor_classification(d, 1.0, {0.0, 1.0});
  CHECK(m.diag.status != FitStatus::converged);
  CHECK(m.beta.allFinite());
  CHECK(std::isfinite(m.intercept));
}

TEST_CASE("gamma=4 classification shrinks the anchor penalty term") {
  AnchorSCM scm = canonical_scm(Task::classification);
  // Two environments per the hand-specified setup.
  scm.n_envs = 2;
  scm.env_feature_offsets = scm.env_feature_offsets.leftCols(2).eval();
  scm.env_outcome_offsets = scm.env_outcome_offsets.head(2).eval();
  const Dataset d = generate(scm, 600, 1.0);
  const ProjectionOperator proj = ProjectionOperator::build(d.anchor);

  auto penalty_at = [&](const LinearAnchorModel& m) {
    const Eigen::VectorXd f = m.predict(d.features);
    const AnchorLossSpec spec{2.0, Link::probit, &proj};
    const LossEvaluation ev = probit_loss(f, d.outcome, spec);
    return ev.projected_residuals.squaredNorm();
  };
  const LinearAnchorModel m1 = fit_linear_anchor_classification(d, 1.0, {0.0, 1.0});
  const LinearAnchorModel m4 = fit_linear_anchor_classification(d, 4.0, {0.0, 1.0});
  CHECK(penalty_at(m4) < penalty_at(m1));
}

TEST_CASE("empirical-Bayes refit with a huge prior recovers the source") {
  const Dataset source_data = testutil::random_dataset(100, 2, 2, 50);
  const LinearAnchorModel source = fit_linear_anchor(source_data, 2.0, {0.0, 1.0});
  const Dataset target = testutil::random_dataset(40, 2, 2, 51);
  const LinearAnchorModel refit = refit_empirical_bayes(source, target, 1e12, {0.0, 1.0});
  CHECK((refit.beta - source.beta).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("empirical-Bayes refit with alpha=0 equals a target-only fit") {
  const Dataset source_data = testutil::random_dataset(100, 2, 2, 52);
  const LinearAnchorModel source = fit_linear_anchor(source_data, 2.0, {0.0, 1.0});
  const Dataset target = testutil::random_dataset(60, 2, 2, 53);
  const LinearAnchorModel refit = refit_empirical_bayes(source, target, 0.0, {0.0, 1.0});
  const auto sol = oracle::anchor_normal_equations(
      target.features, target.outcome,
      Eigen::MatrixXd::Zero(target.n_rows(), target.n_rows()), 1.0);
  CHECK((refit.beta - sol.beta).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(refit.intercept == doctest::Approx(sol.intercept).epsilon(1e-7));
}

TEST_CASE("refit objective is no worse than either endpoint") {
  const Dataset source_data = testutil::random_dataset(100, 2, 2, 54);
  const LinearAnchorModel source = fit_linear_anchor(source_data, 2.0, {0.0, 1.0});
  const Dataset target = testutil::random_dataset(30, 2, 2, 55);

  auto objective = [&](const Eigen::VectorXd& beta, double alpha) {
    // Intercept concentrated out: the optimum for fixed beta is the mean
    // residual.
    const Eigen::VectorXd r0 = target.outcome - target.features * beta;
    const Eigen::VectorXd r = r0.array() - r0.mean();
    return r.squaredNorm() + alpha * (beta - source.beta).squaredNorm();
  };

  for (double alpha : default_alpha_grid()) {
    const LinearAnchorModel refit = refit_empirical_bayes(source, target, alpha, {0.0, 1.0});
    const LinearAnchorModel target_only = refit_empirical_bayes(source, target, 0.0, {0.0, 1.0});
    const double at_refit = objective(refit.beta, alpha);
    CHECK(at_refit <= objective(source.beta, alpha) * (1 + 1e-10) + 1e-10);
    CHECK(at_refit <= objective(target_only.beta, alpha) * (1 + 1e-10) + 1e-10);
  }
}

TEST_CASE("refit rejects mismatched feature sets naming the difference") {
  const Dataset source_data = testutil::random_dataset(50, 2, 2, 56);
  const LinearAnchorModel source = fit_linear_anchor(source_data, 1.0, {0.0, 1.0});
  Dataset target = testutil::random_dataset(30, 2, 2, 57);
  target.column_names = {"x1", "zz"};
  CHECK_THROWS_WITH_AS(refit_empirical_bayes(source, target, 1.0, {0.0, 1.0}),
                       doctest::Contains("zz"), data_error);
}

TEST_CASE("model serialization round-trips bit-identically") {
  const Dataset d = testutil::random_dataset(50, 3, 2, 58);
  const LinearAnchorModel m = fit_linear_anchor(d, 2.0, {0.01, 0.5});
  const std::string j1 = linear_model_to_json(m);
  const LinearAnchorModel back = linear_model_from_json(j1);
  CHECK(linear_model_to_json(back) == j1);
  CHECK((back.predict(d.features) - m.predict(d.features)).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
