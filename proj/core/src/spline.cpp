#include "anchor/spline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "anchor/errors.hpp"

namespace anchor {

double median(std::vector<double> values) {
  if (values.empty()) throw data_error("median of empty set");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw data_error("quantile of empty set");
  if (q < 0.0 || q > 1.0) throw config_error("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double w = h - static_cast<double>(lo);
  return (1.0 - w) * values[lo] + w * values[hi];
}

namespace {

// Pool-adjacent-violators: least-squares isotonic fit in the given
// direction. Leaves monotone inputs untouched.
std::vector<double> isotonic(const std::vector<double>& y, bool increasing) {
  const size_t n = y.size();
  std::vector<double> level(n), weight(n);
  std::vector<size_t> size(n);
  size_t m = 0;
  for (size_t i = 0; i < n; ++i) {
    double v = increasing ? y[i] : -y[i];
    level[m] = v;
    weight[m] = 1.0;
    size[m] = 1;
    ++m;
    while (m > 1 && level[m - 2] > level[m - 1]) {
      const double w = weight[m - 2] + weight[m - 1];
      level[m - 2] = (weight[m - 2] * level[m - 2] + weight[m - 1] * level[m - 1]) / w;
      weight[m - 2] = w;
      size[m - 2] += size[m - 1];
      --m;
    }
  }
  std::vector<double> out;
  out.reserve(n);
  for (size_t b = 0; b < m; ++b)
    for (size_t r = 0; r < size[b]; ++r) out.push_back(increasing ? level[b] : -level[b]);
  return out;
}

}  // namespace

MonotoneCubicSpline::MonotoneCubicSpline(std::vector<double> x, std::vector<double> y,
                                         Monotonicity direction) {
  if (x.size() != y.size()) throw data_error("spline: x and y differ in length");
  if (x.size() < 2) throw data_error("spline: needs at least 2 points");
  for (size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw data_error("spline: x must be strictly increasing");

  bool increasing;
  switch (direction) {
    case Monotonicity::increasing: increasing = true; break;
    case Monotonicity::decreasing: increasing = false; break;
    default: increasing = y.back() >= y.front(); break;
  }
  x_ = std::move(x);
  y_ = isotonic(y, increasing);

  const size_t n = x_.size();
  std::vector<double> secant(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) secant[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);

  slope_.resize(n);
  slope_[0] = secant[0];
  slope_[n - 1] = secant[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    slope_[i] = (secant[i - 1] * secant[i] <= 0.0) ? 0.0 : 0.5 * (secant[i - 1] + secant[i]);
  }
  // Fritsch-Carlson limiting.
  for (size_t i = 0; i + 1 < n; ++i) {
    if (secant[i] == 0.0) {
      slope_[i] = 0.0;
      slope_[i + 1] = 0.0;
      continue;
    }
    const double a = slope_[i] / secant[i];
    const double b = slope_[i + 1] / secant[i];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      slope_[i] = tau * a * secant[i];
      slope_[i + 1] = tau * b * secant[i];
    }
  }
}

double MonotoneCubicSpline::operator()(double x) const {
  const size_t n = x_.size();
  if (x <= x_.front()) return y_.front() + slope_.front() * (x - x_.front());
  if (x >= x_.back()) return y_.back() + slope_.back() * (x - x_.back());
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const size_t i = static_cast<size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  (void)n;
  return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

MonotoneCubicSpline fit_monotone_spline(const std::vector<std::pair<int64_t, double>>& points,
                                        Monotonicity direction) {
  std::map<int64_t, std::vector<double>> by_n;
  for (const auto& [n, v] : points) {
    if (n <= 0) throw data_error("spline: n must be positive");
    by_n[n].push_back(v);
  }
  if (by_n.size() < 2) throw data_error("spline: needs at least 2 distinct n values");
  std::vector<double> x, y;
  for (auto& [n, vals] : by_n) {
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(median(std::move(vals)));
  }
  return MonotoneCubicSpline(std::move(x), std::move(y), direction);
}

}  // namespace anchor
