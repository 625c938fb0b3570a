#include <doctest.h>

#include <cmath>

#include "anchor/errors.hpp"
#include "anchor/rng.hpp"
#include "anchor/spline.hpp"

using namespace anchor;

TEST_SUITE("spline") {

TEST_CASE("median and quantile helpers") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(quantile({1, 2, 3, 4, 5}, 0.0) == 1.0);
  CHECK(quantile({1, 2, 3, 4, 5}, 1.0) == 5.0);
  CHECK(quantile({1, 2, 3, 4, 5}, 0.5) == 3.0);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("monotone input is interpolated exactly through every knot") {
  std::vector<std::pair<int64_t, double>> points = {
      {10, 5.0}, {20, 3.0}, {40, 2.0}, {80, 1.5}, {160, 1.4}};
  const MonotoneCubicSpline s = fit_monotone_spline(points);
  for (const auto& [n, v] : points) {
    CHECK(s(std::log(static_cast<double>(n))) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("non-monotone jitter produces a monotone curve") {
  std::vector<double> x = {0, 1, 2, 3, 4, 5};
  std::vector<double> y = {5.0, 4.0, 4.2, 3.0, 3.05, 2.0};  // two violations
  const MonotoneCubicSpline s(x, y, Monotonicity::decreasing);
  double prev = s(-0.5);
  for (double t = -0.45; t <= 5.5; t += 0.01) {
    const double cur = s(t);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("evaluation between knots stays between neighboring knot values") {
  Rng rng(100);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> x, y;
    double value = 10.0;
    for (int i = 0; i < 8; ++i) {
      x.push_back(static_cast<double>(i));
      value -= std::fabs(rng.normal());
      y.push_back(value);
    }
    const MonotoneCubicSpline s(x, y);
    for (size_t i = 0; i + 1 < x.size(); ++i) {
      const double mid = s(0.5 * (x[i] + x[i + 1]));
      CHECK(mid <= y[i] + 1e-12);
      CHECK(mid >= y[i + 1] - 1e-12);
    }
  }
}

TEST_CASE("extrapolation is linear with the boundary slope") {
  std::vector<double> x = {0, 1, 2};
  std::vector<double> y = {0, 1, 2};
  const MonotoneCubicSpline s(x, y);
  CHECK(s(-1.0) == doctest::Approx(-1.0));
  CHECK(s(4.0) == doctest::Approx(4.0));
}

TEST_CASE("too few points is an error") {
  CHECK_THROWS_AS(fit_monotone_spline({{10, 1.0}}), data_error);
  CHECK_THROWS_AS(fit_monotone_spline({{10, 1.0}, {10, 2.0}}), data_error);
  CHECK_THROWS_AS(MonotoneCubicSpline({1.0, 1.0}, {0.0, 1.0}), data_error);
}

TEST_CASE("per-n medians feed the fit") {
  std::vector<std::pair<int64_t, double>> points = {
      {10, 1.0}, {10, 3.0}, {10, 2.0}, {20, 0.5}, {20, 0.7}};
  const MonotoneCubicSpline s = fit_monotone_spline(points);
  CHECK(s(std::log(10.0)) == doctest::Approx(2.0));
  CHECK(s(std::log(20.0)) == doctest::Approx(0.6));
}

}  // TEST_SUITE
