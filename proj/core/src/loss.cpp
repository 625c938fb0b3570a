#include "anchor/loss.hpp"

#include <cmath>

#include "anchor/errors.hpp"
#include "anchor/gaussian.hpp"

namespace anchor {

Link link_from_string(const std::string& s) {
  if (s == "identity") return Link::identity;
  if (s == "probit") return Link::probit;
  if (s == "logistic-diagnostic") return Link::logistic_diagnostic;
  throw config_error("unknown link: '" + s + "'");
}

std::string link_to_string(Link link) {
  switch (link) {
    case Link::identity: return "identity";
    case Link::probit: return "probit";
    case Link::logistic_diagnostic: return "logistic-diagnostic";
  }
  return "identity";
}

namespace {

void check_spec(const AnchorLossSpec& spec, int64_t n) {
  if (spec.gamma < 1.0) throw config_error("gamma must be >= 1");
  if (!spec.projection) throw config_error("loss spec has no projection");
  if (spec.projection->rows() != n) throw data_error("projection rows do not match scores");
}

// -log(sigma(z)) evaluated without overflow.
double log1p_exp_neg(double z) {
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

}  // namespace

Eigen::VectorXd LossEvaluation::hessian_vector_product(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out = hessian_diag.cwiseProduct(v);
  if (gamma_minus_one != 0.0) {
    const Eigen::VectorXd wv = anchor_weight.cwiseProduct(v);
    out += gamma_minus_one * anchor_weight.cwiseProduct(projection->apply(wv));
  }
  return out;
}

LossEvaluation regression_loss(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                               const AnchorLossSpec& spec) {
  if (f.size() != y.size()) throw data_error("scores and outcomes differ in length");
  if (spec.link != Link::identity) throw config_error("regression loss requires identity link");
  check_spec(spec, f.size());
  const double gm1 = spec.gamma - 1.0;

  LossEvaluation ev;
  ev.gamma_minus_one = gm1;
  ev.projection = spec.projection;
  ev.residuals = y - f;
  ev.value = 0.5 * ev.residuals.squaredNorm();
  ev.gradient = -ev.residuals;
  ev.hessian_diag = Eigen::VectorXd::Ones(f.size());
  ev.anchor_weight = Eigen::VectorXd::Ones(f.size());
  if (gm1 != 0.0) {
    ev.projected_residuals = spec.projection->apply(ev.residuals);
    ev.value += 0.5 * gm1 * ev.projected_residuals.squaredNorm();
    ev.gradient -= gm1 * ev.projected_residuals;
  }
  return ev;
}

LossEvaluation probit_loss(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                           const AnchorLossSpec& spec) {
  if (f.size() != y.size()) throw data_error("scores and outcomes differ in length");
  if (spec.link != Link::probit) throw config_error("probit loss requires probit link");
  check_spec(spec, f.size());
  const int64_t n = f.size();
  const double gm1 = spec.gamma - 1.0;

  LossEvaluation ev;
  ev.gamma_minus_one = gm1;
  ev.projection = spec.projection;
  ev.residuals.resize(n);
  ev.anchor_weight.resize(n);
  Eigen::VectorXd ddr(n);
  double nll = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    if (y[i] != 1.0 && y[i] != -1.0)
      throw data_error("probit loss: label outside {-1,+1} at row " + std::to_string(i + 1));
    const ProbitResidual pr = probit_residual(f[i], y[i]);
    ev.residuals[i] = pr.r;
    ev.anchor_weight[i] = pr.dr;
    ddr[i] = pr.ddr;
    nll -= log_norm_cdf(y[i] * f[i]);
  }
  ev.value = nll;
  ev.gradient = ev.residuals;
  ev.hessian_diag = ev.anchor_weight;
  if (gm1 != 0.0) {
    ev.projected_residuals = spec.projection->apply(ev.residuals);
    ev.value += 0.5 * gm1 * ev.projected_residuals.squaredNorm();
    ev.gradient += gm1 * ev.anchor_weight.cwiseProduct(ev.projected_residuals);
    ev.hessian_diag += gm1 * ev.projected_residuals.cwiseProduct(ddr);
  }
  return ev;
}

LossEvaluation evaluate_loss(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                             const AnchorLossSpec& spec) {
  switch (spec.link) {
    case Link::identity: return regression_loss(f, y, spec);
    case Link::probit: return probit_loss(f, y, spec);
    case Link::logistic_diagnostic:
      throw config_error("logistic link is diagnostic-only, not trainable");
  }
  throw config_error("unknown link");
}

std::vector<double> single_observation_loss_curve(Link link, double gamma, double y,
                                                  const std::vector<double>& f_grid) {
  if (gamma < 1.0) throw config_error("gamma must be >= 1");
  if (y != 1.0 && y != -1.0) throw data_error("label outside {-1,+1}");
  const double gm1 = gamma - 1.0;
  std::vector<double> out;
  out.reserve(f_grid.size());
  for (double f : f_grid) {
    double value;
    if (link == Link::probit) {
      const double r = probit_residual(f, y).r;
      value = -log_norm_cdf(y * f) + 0.5 * gm1 * r * r;
    } else if (link == Link::logistic_diagnostic) {
      const double z = y * f;
      const double r = -y / (1.0 + std::exp(z));  // -y * sigma(-yf)
      value = log1p_exp_neg(z) + 0.5 * gm1 * r * r;
    } else {
      throw config_error("loss curve supports probit and logistic links only");
    }
    out.push_back(value);
  }
  return out;
}

}  // namespace anchor
