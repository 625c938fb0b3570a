#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace anchor {

enum class Monotonicity { automatic, increasing, decreasing };

// Monotone cubic interpolant with Fritsch-Carlson slope limiting. Knot
// values are first made monotone by pooling adjacent violators, so the
// evaluated curve is monotone even for jittered inputs; monotone inputs are
// interpolated exactly. Outside the knot range the curve extends linearly
// with the boundary slope.
class MonotoneCubicSpline {
 public:
  MonotoneCubicSpline(std::vector<double> x, std::vector<double> y,
                      Monotonicity direction = Monotonicity::automatic);

  double operator()(double x) const;
  double min_x() const { return x_.front(); }
  double max_x() const { return x_.back(); }
  const std::vector<double>& knots_x() const { return x_; }
  const std::vector<double>& knots_y() const { return y_; }

 private:
  std::vector<double> x_, y_, slope_;
};

// Groups (n, value) pairs by n, takes per-n medians, and fits a monotone
// cubic spline over log(n). Needs at least 2 distinct n values.
MonotoneCubicSpline fit_monotone_spline(const std::vector<std::pair<int64_t, double>>& points,
                                        Monotonicity direction = Monotonicity::automatic);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);  // linear interpolation

}  // namespace anchor
