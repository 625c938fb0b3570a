#pragma once

namespace anchor {

// Standard normal density, CDF and helpers used by the probit link. All of
// these stay finite over the whole double range; the CDF-related functions
// switch to an asymptotic expansion in the far left tail where direct
// evaluation underflows.

double norm_pdf(double x);
double norm_cdf(double x);

// log(Phi(x)), accurate for x down to the underflow region of Phi.
double log_norm_cdf(double x);

// phi(x) / Phi(x). Tends to -x as x -> -inf and to 0 as x -> +inf.
double mills_ratio(double x);

// Inverse CDF (Wichura's PPND16). p in (0, 1); throws numeric_error outside.
double norm_quantile(double p);

// Phi(score) clamped to the open interval (0, 1); saturated scores never
// produce exact 0/1 probabilities.
double probit_probability(double score);

// Score residual machinery for the probit link with y in {-1, +1}:
//   r(f)      = -y * phi(f) / Phi(y f)        (gradient of -log Phi(y f))
//   r'(f)     = -f * r + r^2
//   r''(f)    = (f^2 - 1) r - 3 f r^2 + 2 r^3
// Evaluated in a cancellation-free form in the far tail.
struct ProbitResidual {
  double r;
  double dr;   // first derivative, always > 0
  double ddr;  // second derivative
};
ProbitResidual probit_residual(double f, double y);

}  // namespace anchor
