#include <doctest.h>

#include <cmath>

#include "anchor/errors.hpp"
#include "anchor/gaussian.hpp"
#include "anchor/metrics.hpp"
#include "anchor/rng.hpp"
#include "support/oracles.hpp"

using namespace anchor;

TEST_SUITE("metrics") {

TEST_CASE("mse and probit nll basics") {
  Eigen::VectorXd pred(2), y(2);
  pred << 1, 2;
  y << 0, 4;
  CHECK(mse(pred, y) == doctest::Approx(2.5));

  Eigen::VectorXd scores(1), labels(1);
  scores << 0;
  labels << 1;
  CHECK(probit_nll(scores, labels) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(std::isfinite(probit_nll(Eigen::VectorXd::Constant(1, -40.0), labels)));
}

TEST_CASE("average precision on the hand-worked four-point example") {
  Eigen::VectorXd scores(4), labels(4);
  scores << 0.9, 0.8, 0.7, 0.6;
  labels << 1, -1, 1, -1;
  CHECK(auprc(scores, labels) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("perfectly separating scores give AP = 1") {
  Eigen::VectorXd scores(6), labels(6);
  scores << 5, 4, 3, -1, -2, -3;
  labels << 1, 1, 1, -1, -1, -1;
  CHECK(auprc(scores, labels) == doctest::Approx(1.0));
}

TEST_CASE("all scores tied gives AP = prevalence") {
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(8);
  Eigen::VectorXd labels(8);
  labels << 1, -1, -1, -1, 1, -1, -1, -1;
  CHECK(auprc(scores, labels) == doctest::Approx(0.25));
}

TEST_CASE("random scores give AP near prevalence, matching the enumeration oracle") {
  Rng rng(81);
  const int64_t n = 2000;
  Eigen::VectorXd scores(n), labels(n);
  int64_t pos = 0;
  for (int64_t i = 0; i < n; ++i) {
    scores[i] = rng.normal();
    labels[i] = rng.below(5) == 0 ? 1.0 : -1.0;
    if (labels[i] == 1.0) ++pos;
  }
  const double prevalence = static_cast<double>(pos) / n;
  const double ap = auprc(scores, labels);
  CHECK(ap == doctest::Approx(oracle::average_precision_enumeration(scores, labels))
                  .epsilon(1e-10));
  CHECK(std::fabs(ap - prevalence) < 0.05);
}

TEST_CASE("AP agrees with the enumeration oracle under heavy ties") {
  Rng rng(82);
  const int64_t n = 500;
  Eigen::VectorXd scores(n), labels(n);
  for (int64_t i = 0; i < n; ++i) {
    scores[i] = static_cast<double>(rng.below(7));  // many ties
    labels[i] = rng.below(3) == 0 ? 1.0 : -1.0;
  }
  CHECK(auprc(scores, labels) ==
        doctest::Approx(oracle::average_precision_enumeration(scores, labels)).epsilon(1e-10));
}

TEST_CASE("AP is invariant under strictly increasing transformations") {
  Rng rng(83);
  const int64_t n = 300;
  Eigen::VectorXd scores(n), labels(n);
  for (int64_t i = 0; i < n; ++i) {
    scores[i] = rng.normal();
    labels[i] = rng.below(4) == 0 ? 1.0 : -1.0;
  }
  const double base = auprc(scores, labels);
  Eigen::VectorXd shifted = 3.0 * scores + Eigen::VectorXd::Constant(n, 2.0);
  Eigen::VectorXd warped = scores.array().exp();
  CHECK(auprc(shifted, labels) == doctest::Approx(base).epsilon(1e-14));
  CHECK(auprc(warped, labels) == doctest::Approx(base).epsilon(1e-14));
}

TEST_CASE("no positive labels is an error") {
  Eigen::VectorXd scores(3), labels(3);
  scores << 1, 2, 3;
  labels << -1, -1, -1;
  CHECK_THROWS_AS(auprc(scores, labels), data_error);
}

}  // TEST_SUITE
