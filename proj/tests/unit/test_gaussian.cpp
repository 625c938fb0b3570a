#include <doctest.h>

#include <cmath>

#include "anchor/errors.hpp"
#include "anchor/gaussian.hpp"

using namespace anchor;

TEST_SUITE("gaussian") {

TEST_CASE("cdf and pdf basics") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
  CHECK(norm_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(log_norm_cdf(0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
}

TEST_CASE("log cdf is continuous and finite across the tail switch") {
  // The asymptotic branch takes over below -8.
  const double just_above = log_norm_cdf(-7.999999);
  const double just_below = log_norm_cdf(-8.000001);
  CHECK(std::fabs(just_above - just_below) < 1e-5 * std::fabs(just_above));
  for (double x : {-1e3, -400.0, -50.0, -8.5, 35.0, 1e3}) {
    CHECK(std::isfinite(log_norm_cdf(x)));
  }
  // Reference: log Phi(-10) from high-precision computation.
  CHECK(log_norm_cdf(-10.0) == doctest::Approx(-53.23128515051247).epsilon(1e-10));
}

TEST_CASE("mills ratio matches pdf/cdf and stays finite") {
  for (double x : {-6.0, -2.0, 0.0, 1.5, 5.0}) {
    CHECK(mills_ratio(x) == doctest::Approx(norm_pdf(x) / norm_cdf(x)).epsilon(1e-12));
  }
  CHECK(mills_ratio(-40.0) == doctest::Approx(40.0 + 1.0 / 40.0).epsilon(1e-3));
  CHECK(std::isfinite(mills_ratio(-1e6)));
  CHECK(mills_ratio(50.0) >= 0.0);
}

TEST_CASE("quantile inverts the cdf") {
  CHECK(norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(norm_quantile(norm_cdf(1.0)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(norm_quantile(norm_cdf(-2.5)) == doctest::Approx(-2.5).epsilon(1e-10));
  for (double p : {1e-12, 1e-5, 0.3, 0.9, 1.0 - 1e-10}) {
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK_THROWS_AS(norm_quantile(0.0), numeric_error);
  CHECK_THROWS_AS(norm_quantile(1.0), numeric_error);
}

TEST_CASE("probit residual derivatives match finite differences") {
  for (double y : {1.0, -1.0}) {
    for (double f : {-3.0, -0.7, 0.0, 0.4, 2.5, 6.0}) {
      const double h = 1e-6;
      const ProbitResidual pr = probit_residual(f, y);
      const ProbitResidual up = probit_residual(f + h, y);
      const ProbitResidual down = probit_residual(f - h, y);
      CHECK(pr.dr == doctest::Approx((up.r - down.r) / (2 * h)).epsilon(1e-6));
      CHECK(pr.ddr == doctest::Approx((up.dr - down.dr) / (2 * h)).epsilon(1e-5));
      CHECK(pr.dr > 0.0);
    }
  }
}

TEST_CASE("probit residual never produces NaN at extreme scores") {
  for (double f : {-1e5, -300.0, -12.0, 12.0, 300.0, 1e5}) {
    for (double y : {1.0, -1.0}) {
      const ProbitResidual pr = probit_residual(f, y);
      CHECK(std::isfinite(pr.r));
      CHECK(std::isfinite(pr.dr));
      CHECK(std::isfinite(pr.ddr));
    }
  }
}

}  // TEST_SUITE
