#include "anchor/linear.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "anchor/csv.hpp"
#include "anchor/errors.hpp"
#include "anchor/gaussian.hpp"

namespace anchor {

namespace {

// Stop tolerance on the max coordinate change; tight enough that the
// solution itself is within 1e-8 of the direct minimizer on correlated
// designs.
constexpr double kCdTol = 1e-12;
constexpr int64_t kCdMaxSweeps = 100000;
constexpr double kNewtonTol = 1e-6;
constexpr int kNewtonMaxIter = 200;
// On standardized features, probit scores beyond ~10 standard deviations are
// saturated; coefficients this large mean (near-)separable data.
constexpr double kCoefficientCap = 50.0;

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

void check_enet(const ElasticNetSpec& enet) {
  if (enet.lambda < 0.0) throw config_error("lambda must be >= 0");
  if (enet.eta < 0.0 || enet.eta > 1.0) throw config_error("eta must lie in [0, 1]");
}

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
};

Standardization standardize(const Eigen::MatrixXd& x, Eigen::MatrixXd* out) {
  const int64_t n = x.rows();
  const int64_t p = x.cols();
  Standardization s;
  s.mean = x.colwise().mean();
  s.scale.resize(p);
  out->resize(n, p);
  for (int64_t j = 0; j < p; ++j) {
    out->col(j) = x.col(j).array() - s.mean[j];
    double var = out->col(j).squaredNorm() / static_cast<double>(n);
    s.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    out->col(j) /= s.scale[j];
  }
  return s;
}

// Cyclic coordinate descent for
//   (1/2n) ||r||^2 + (prior/2n) ||b - prior_center||^2
//       + lambda * (eta ||b||_1 + (1-eta) ||b||_2^2)
// with r = y - X b maintained incrementally. Returns diagnostics; throws on
// non-convergence.
FitDiagnostics coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const ElasticNetSpec& enet, double prior,
                                  const Eigen::VectorXd& prior_center, Eigen::VectorXd* beta) {
  const int64_t n = x.rows();
  const int64_t p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double l1 = enet.lambda * enet.eta;
  const double l2 = 2.0 * enet.lambda * (1.0 - enet.eta);
  const double prior_w = prior * inv_n;

  Eigen::VectorXd col_ss(p);
  for (int64_t j = 0; j < p; ++j) col_ss[j] = x.col(j).squaredNorm() * inv_n;

  Eigen::VectorXd r = y - x * (*beta);
  FitDiagnostics diag;
  for (int64_t sweep = 0; sweep < kCdMaxSweeps; ++sweep) {
    double max_delta = 0.0;
    for (int64_t j = 0; j < p; ++j) {
      const double old = (*beta)[j];
      const double denom = col_ss[j] + prior_w + l2;
      double next = 0.0;
      if (denom > 0.0) {
        const double rho =
            x.col(j).dot(r) * inv_n + col_ss[j] * old + prior_w * prior_center[j];
        next = soft_threshold(rho, l1) / denom;
      }
      if (next != old) {
        r += x.col(j) * (old - next);
        (*beta)[j] = next;
        max_delta = std::max(max_delta, std::fabs(next - old));
      }
    }
    diag.iterations = sweep + 1;
    diag.last_delta = max_delta;
    if (max_delta < kCdTol) {
      diag.status = FitStatus::converged;
      return diag;
    }
  }
  throw numeric_error("coordinate descent did not converge after " +
                      std::to_string(kCdMaxSweeps) +
                      " sweeps; last max coordinate change " + format_double(diag.last_delta));
}

void check_features_match(const std::vector<std::string>& expected,
                          const std::vector<std::string>& got) {
  if (expected == got) return;
  std::set<std::string> e(expected.begin(), expected.end());
  std::set<std::string> g(got.begin(), got.end());
  std::string only_model, only_data;
  for (const auto& name : e)
    if (!g.count(name)) only_model += (only_model.empty() ? "" : ", ") + name;
  for (const auto& name : g)
    if (!e.count(name)) only_data += (only_data.empty() ? "" : ", ") + name;
  if (only_model.empty() && only_data.empty())
    throw data_error("feature columns match but are ordered differently");
  throw data_error("feature mismatch; missing from data: [" + only_model +
                   "], unexpected in data: [" + only_data + "]");
}

// Inner solver of the proximal Newton step: minimizes
//   1/2 d^T Q d + g^T d + l1 * ( ||(b + d)_penalized||_1 - ||b_penalized||_1 )
// over d by cyclic coordinate descent. The last coordinate (intercept) is
// never penalized.
Eigen::VectorXd newton_direction(const Eigen::MatrixXd& q, const Eigen::VectorXd& g,
                                 const Eigen::VectorXd& b, double l1) {
  const int64_t m = g.size();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
  if (l1 == 0.0) {
    Eigen::MatrixXd qj = q;
    qj.diagonal().array() += 1e-12 * (q.trace() / static_cast<double>(m) + 1.0);
    return Eigen::LLT<Eigen::MatrixXd>(qj).solve(-g);
  }
  Eigen::VectorXd grad = g;  // g + Q d, maintained
  for (int sweep = 0; sweep < 200; ++sweep) {
    double max_delta = 0.0;
    for (int64_t j = 0; j < m; ++j) {
      const double qjj = q(j, j);
      if (qjj <= 0.0) continue;
      const double zj = b[j] + d[j];
      const double rho = qjj * zj - grad[j];
      const double next_z = (j == m - 1) ? rho / qjj : soft_threshold(rho, l1) / qjj;
      const double delta = next_z - zj;
      if (delta != 0.0) {
        d[j] += delta;
        grad += q.col(j) * delta;
        max_delta = std::max(max_delta, std::fabs(delta));
      }
    }
    if (max_delta < 1e-12) break;
  }
  return d;
}

nlohmann::json enet_to_json(const ElasticNetSpec& e) {
  return {{"lambda", e.lambda}, {"eta", e.eta}};
}

}  // namespace

Eigen::VectorXd LinearAnchorModel::predict(const Eigen::MatrixXd& features) const {
  if (features.cols() != beta.size()) throw data_error("feature count does not match model");
  return (features * beta).array() + intercept;
}

Eigen::VectorXd LinearAnchorModel::predict(const Dataset& d) const {
  check_features_match(feature_names, d.column_names);
  return predict(d.features);
}

Eigen::VectorXd LinearAnchorModel::predict_proba(const Eigen::MatrixXd& features) const {
  if (task != Task::classification) throw config_error("predict_proba requires a classifier");
  Eigen::VectorXd f = predict(features);
  for (int64_t i = 0; i < f.size(); ++i) f[i] = probit_probability(f[i]);
  return f;
}

double lambda_max(const Dataset& d) {
  if (d.task != Task::regression) throw config_error("lambda_max requires a regression dataset");
  if (d.n_rows() == 0) throw data_error("empty dataset");
  Eigen::MatrixXd xs;
  standardize(d.features, &xs);
  const Eigen::VectorXd yc = d.outcome.array() - d.outcome.mean();
  // Same arithmetic as the coordinate-descent correlation so the boundary
  // property (all-zero lasso exactly at lambda_max) holds bit for bit.
  const double inv_n = 1.0 / static_cast<double>(d.n_rows());
  double best = 0.0;
  for (int64_t j = 0; j < xs.cols(); ++j)
    best = std::max(best, std::fabs(xs.col(j).dot(yc) * inv_n));
  return best;
}

LinearAnchorModel fit_linear_anchor(const Dataset& d, double gamma, ElasticNetSpec enet) {
  if (d.task != Task::regression)
    throw config_error("fit_linear_anchor requires a regression dataset");
  if (gamma < 1.0) throw config_error("gamma must be >= 1");
  check_enet(enet);
  if (d.n_rows() == 0) throw data_error("empty dataset");

  Eigen::MatrixXd xs;
  const Standardization std_info = standardize(d.features, &xs);
  const double y_mean = d.outcome.mean();
  Eigen::VectorXd yc = d.outcome.array() - y_mean;

  if (gamma != 1.0) {
    const ProjectionOperator proj = ProjectionOperator::build(d.anchor);
    const double w = std::sqrt(gamma) - 1.0;
    for (int64_t j = 0; j < xs.cols(); ++j) xs.col(j) += w * proj.apply(xs.col(j));
    yc += w * proj.apply(yc);
  }

  LinearAnchorModel m;
  m.task = Task::regression;
  m.gamma = gamma;
  m.enet = enet;
  m.feature_names = d.column_names;
  m.feature_mean = std_info.mean;
  m.feature_scale = std_info.scale;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d.n_features());
  m.diag = coordinate_descent(xs, yc, enet, 0.0, Eigen::VectorXd::Zero(d.n_features()), &beta);

  m.beta = beta.cwiseQuotient(std_info.scale);
  m.intercept = y_mean - m.beta.dot(std_info.mean);
  return m;
}

LinearAnchorModel fit_linear_anchor_classification(const Dataset& d, double gamma,
                                                   ElasticNetSpec enet) {
  if (d.task != Task::classification)
    throw config_error("fit_linear_anchor_classification requires a classification dataset");
  if (gamma < 1.0) throw config_error("gamma must be >= 1");
  check_enet(enet);
  const int64_t n = d.n_rows();
  if (n == 0) throw data_error("empty dataset");
  const int64_t p = d.n_features();
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::MatrixXd xs;
  const Standardization std_info = standardize(d.features, &xs);
  const ProjectionOperator proj = ProjectionOperator::build(d.anchor);
  AnchorLossSpec spec{gamma, Link::probit, &proj};

  const double l1 = enet.lambda * enet.eta;
  const double l2 = 2.0 * enet.lambda * (1.0 - enet.eta);

  // Parameters: p standardized coefficients plus the intercept.
  Eigen::VectorXd params = Eigen::VectorXd::Zero(p + 1);
  const double prevalence = ((d.outcome.array() + 1.0) / 2.0).mean();
  params[p] = norm_quantile(std::clamp(prevalence, 0.5 * inv_n, 1.0 - 0.5 * inv_n));

  auto objective = [&](const Eigen::VectorXd& q) {
    const Eigen::VectorXd f = (xs * q.head(p)).array() + q[p];
    const LossEvaluation ev = probit_loss(f, d.outcome, spec);
    return ev.value * inv_n + l1 * q.head(p).lpNorm<1>() + 0.5 * l2 * q.head(p).squaredNorm();
  };

  LinearAnchorModel m;
  m.task = Task::classification;
  m.gamma = gamma;
  m.enet = enet;
  m.feature_names = d.column_names;
  m.feature_mean = std_info.mean;
  m.feature_scale = std_info.scale;
  m.diag.status = FitStatus::iteration_limit;

  double obj = objective(params);
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    const Eigen::VectorXd f = (xs * params.head(p)).array() + params[p];
    const LossEvaluation ev = probit_loss(f, d.outcome, spec);

    Eigen::VectorXd grad(p + 1);
    grad.head(p) = xs.transpose() * ev.gradient * inv_n + l2 * params.head(p);
    grad[p] = ev.gradient.sum() * inv_n;

    // Minimal-norm subgradient for the l1 part.
    double opt = std::fabs(grad[p]);
    for (int64_t j = 0; j < p; ++j) {
      const double gj = grad[j];
      double sub;
      if (params[j] != 0.0) {
        sub = gj + l1 * (params[j] > 0.0 ? 1.0 : -1.0);
      } else {
        sub = soft_threshold(gj, l1);
      }
      opt = std::max(opt, std::fabs(sub));
    }
    if (opt < kNewtonTol) {
      m.diag.status = FitStatus::converged;
      m.diag.iterations = iter;
      break;
    }

    // Q = Xa^T H Xa / n with the factored Hessian.
    Eigen::MatrixXd xa(n, p + 1);
    xa.leftCols(p) = xs;
    xa.col(p).setOnes();
    Eigen::MatrixXd hxa = xa.array().colwise() * ev.hessian_diag.array();
    if (ev.gamma_minus_one != 0.0) {
      Eigen::MatrixXd wxa = xa.array().colwise() * ev.anchor_weight.array();
      wxa = proj.apply_columns(wxa);
      hxa += ev.gamma_minus_one * (wxa.array().colwise() * ev.anchor_weight.array()).matrix();
    }
    Eigen::MatrixXd q = xa.transpose() * hxa * inv_n;
    q.diagonal().head(p).array() += l2;
    q.diagonal().array() += 1e-10 * (q.trace() / static_cast<double>(p + 1) + 1.0);

    Eigen::VectorXd dir = newton_direction(q, grad, params, l1);
    if (!dir.allFinite()) throw numeric_error("probit fit: non-finite Newton direction");

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= 50; ++halving) {
      const Eigen::VectorXd cand = params + step * dir;
      const double cand_obj = objective(cand);
      if (std::isfinite(cand_obj) && cand_obj < obj) {
        params = cand;
        obj = cand_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      throw numeric_error("probit fit: backtracking exhausted 50 halvings without decrease");

    m.diag.iterations = iter + 1;
    if (params.head(p).cwiseAbs().maxCoeff() > kCoefficientCap ||
        std::fabs(params[p]) > kCoefficientCap) {
      m.diag.status = FitStatus::coefficient_cap;
      break;
    }
  }

  m.beta = params.head(p).cwiseQuotient(std_info.scale);
  m.intercept = params[p] - m.beta.dot(std_info.mean);
  if (!m.beta.allFinite() || !std::isfinite(m.intercept))
    throw numeric_error("probit fit produced non-finite coefficients");
  return m;
}

LinearAnchorModel refit_empirical_bayes(const LinearAnchorModel& source, const Dataset& target,
                                        double alpha, ElasticNetSpec enet) {
  if (alpha < 0.0) throw config_error("alpha must be >= 0");
  check_enet(enet);
  check_features_match(source.feature_names, target.column_names);
  const int64_t n = target.n_rows();
  if (n == 0) throw data_error("empty target dataset");
  const int64_t p = target.n_features();
  const double inv_n = 1.0 / static_cast<double>(n);

  LinearAnchorModel m;
  m.task = source.task;
  m.gamma = source.gamma;
  m.enet = enet;
  m.feature_names = source.feature_names;
  m.feature_mean = Eigen::VectorXd::Zero(p);
  m.feature_scale = Eigen::VectorXd::Ones(p);

  if (source.task == Task::regression) {
    if (target.task != Task::regression)
      throw config_error("source and target tasks do not match");
    const Eigen::VectorXd col_mean = target.features.colwise().mean();
    Eigen::MatrixXd xc = target.features.rowwise() - col_mean.transpose();
    const double y_mean = target.outcome.mean();
    const Eigen::VectorXd yc = target.outcome.array() - y_mean;

    Eigen::VectorXd beta = source.beta;  // warm start at the prior center
    m.diag = coordinate_descent(xc, yc, enet, alpha, source.beta, &beta);
    m.beta = beta;
    m.intercept = y_mean - beta.dot(col_mean);
    return m;
  }

  // Classification: probit NLL with the same quadratic prior, gamma = 1.
  if (target.task != Task::classification)
    throw config_error("source and target tasks do not match");
  std::vector<int32_t> one_env(n, 0);
  const ProjectionOperator proj = ProjectionOperator::group_mean(one_env, 1);
  AnchorLossSpec spec{1.0, Link::probit, &proj};
  const double l1 = enet.lambda * enet.eta;
  const double l2 = 2.0 * enet.lambda * (1.0 - enet.eta);
  const double prior_w = 2.0 * alpha * inv_n;

  Eigen::VectorXd params(p + 1);
  params.head(p) = source.beta;
  params[p] = source.intercept;

  auto objective = [&](const Eigen::VectorXd& q) {
    const Eigen::VectorXd f = (target.features * q.head(p)).array() + q[p];
    const LossEvaluation ev = probit_loss(f, target.outcome, spec);
    return ev.value * inv_n + 0.5 * prior_w * (q.head(p) - source.beta).squaredNorm() +
           l1 * q.head(p).lpNorm<1>() + 0.5 * l2 * q.head(p).squaredNorm();
  };

  double obj = objective(params);
  m.diag.status = FitStatus::iteration_limit;
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    const Eigen::VectorXd f = (target.features * params.head(p)).array() + params[p];
    const LossEvaluation ev = probit_loss(f, target.outcome, spec);
    Eigen::VectorXd grad(p + 1);
    grad.head(p) = target.features.transpose() * ev.gradient * inv_n +
                   prior_w * (params.head(p) - source.beta) + l2 * params.head(p);
    grad[p] = ev.gradient.sum() * inv_n;
    double opt = std::fabs(grad[p]);
    for (int64_t j = 0; j < p; ++j) {
      const double gj = grad[j];
      const double sub = params[j] != 0.0 ? gj + l1 * (params[j] > 0.0 ? 1.0 : -1.0)
                                          : soft_threshold(gj, l1);
      opt = std::max(opt, std::fabs(sub));
    }
    if (opt < kNewtonTol) {
      m.diag.status = FitStatus::converged;
      m.diag.iterations = iter;
      break;
    }

    Eigen::MatrixXd xa(n, p + 1);
    xa.leftCols(p) = target.features;
    xa.col(p).setOnes();
    const Eigen::MatrixXd hxa = xa.array().colwise() * ev.hessian_diag.array();
    Eigen::MatrixXd q = xa.transpose() * hxa * inv_n;
    q.diagonal().head(p).array() += prior_w + l2;
    q.diagonal().array() += 1e-10 * (q.trace() / static_cast<double>(p + 1) + 1.0);

    const Eigen::VectorXd dir = newton_direction(q, grad, params, l1);
    if (!dir.allFinite()) throw numeric_error("refit: non-finite Newton direction");
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= 50; ++halving) {
      const Eigen::VectorXd cand = params + step * dir;
      const double cand_obj = objective(cand);
      if (std::isfinite(cand_obj) && cand_obj < obj) {
        params = cand;
        obj = cand_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      throw numeric_error("refit: backtracking exhausted 50 halvings without decrease");
    m.diag.iterations = iter + 1;
    // Original-scale coefficients: only guard against runaway magnitudes.
    if (params.cwiseAbs().maxCoeff() > 1e6) {
      m.diag.status = FitStatus::coefficient_cap;
      break;
    }
  }
  m.beta = params.head(p);
  m.intercept = params[p];
  return m;
}

std::string linear_model_to_json(const LinearAnchorModel& m) {
  nlohmann::json j;
  j["format"] = "anchorkit-linear";
  j["version"] = 1;
  j["task"] = m.task == Task::regression ? "regression" : "classification";
  j["gamma"] = m.gamma;
  j["enet"] = enet_to_json(m.enet);
  j["intercept"] = m.intercept;
  j["feature_names"] = m.feature_names;
  j["beta"] = std::vector<double>(m.beta.data(), m.beta.data() + m.beta.size());
  j["standardization"] = {
      {"mean", std::vector<double>(m.feature_mean.data(), m.feature_mean.data() + m.feature_mean.size())},
      {"scale", std::vector<double>(m.feature_scale.data(), m.feature_scale.data() + m.feature_scale.size())}};
  return j.dump(2) + "\n";
}

LinearAnchorModel linear_model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw data_error(std::string("model parse error: ") + e.what());
  }
  if (j.value("format", "") != "anchorkit-linear") throw data_error("not a linear model file");
  LinearAnchorModel m;
  m.task = j.at("task").get<std::string>() == "classification" ? Task::classification
                                                               : Task::regression;
  m.gamma = j.at("gamma").get<double>();
  m.enet.lambda = j.at("enet").at("lambda").get<double>();
  m.enet.eta = j.at("enet").at("eta").get<double>();
  m.intercept = j.at("intercept").get<double>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto beta = j.at("beta").get<std::vector<double>>();
  const auto mean = j.at("standardization").at("mean").get<std::vector<double>>();
  const auto scale = j.at("standardization").at("scale").get<std::vector<double>>();
  m.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
  m.feature_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
  m.feature_scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), scale.size());
  return m;
}

void save_linear_model(const LinearAnchorModel& m, const std::string& path) {
  atomic_write_file(path, linear_model_to_json(m));
}

LinearAnchorModel load_linear_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return linear_model_from_json(buf.str());
}

}  // namespace anchor
