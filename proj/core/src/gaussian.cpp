#include "anchor/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include "anchor/errors.hpp"

namespace anchor {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Far-tail switch point. Below it Phi is evaluated through the asymptotic
// expansion Phi(x) = phi(x)/(-x) * S(x), S(x) = 1 - 1/x^2 + 3/x^4 - ...
constexpr double kTail = -8.0;

// S(x) - 1, for x <= kTail. Terms through 10395/x^12 leave a relative
// truncation error of ~1e-8 at the switch point and far less beyond it.
double tail_series_minus_one(double x) {
  const double u = 1.0 / (x * x);
  return u * (-1.0 + u * (3.0 + u * (-15.0 + u * (105.0 + u * (-945.0 + u * 10395.0)))));
}

}  // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_norm_cdf(double x) {
  if (x >= kTail) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log1p(tail_series_minus_one(x));
}

double mills_ratio(double x) {
  if (x >= kTail) return norm_pdf(x) / norm_cdf(x);
  return -x / (1.0 + tail_series_minus_one(x));
}

ProbitResidual probit_residual(double f, double y) {
  const double x = y * f;
  double m;  // mills_ratio(x)
  double t;  // x + m, free of cancellation in the tail
  if (x >= kTail) {
    m = norm_pdf(x) / norm_cdf(x);
    t = x + m;
  } else {
    const double s1 = tail_series_minus_one(x);
    const double s = 1.0 + s1;
    m = -x / s;
    t = x * s1 / s;
  }
  ProbitResidual out;
  out.r = -y * m;
  out.dr = m * t;
  out.ddr = -y * m * (t * (t + m) - 1.0);
  return out;
}

double probit_probability(double score) {
  return std::clamp(norm_cdf(score), 1e-300, 1.0 - 1e-16);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw numeric_error("norm_quantile: p must lie in (0, 1)");
  // Wichura's algorithm AS 241, PPND16.
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                   6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
               1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return num / den;
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

}  // namespace anchor
