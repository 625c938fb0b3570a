#include "anchor/scm.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "anchor/csv.hpp"
#include "anchor/errors.hpp"
#include "anchor/metrics.hpp"
#include "anchor/rng.hpp"

namespace anchor {

void validate_scm(const AnchorSCM& scm) {
  if (scm.n_envs < 1 || scm.n_hidden < 0 || scm.n_features < 1)
    throw config_error("scm: invalid dimensions");
  if (scm.env_feature_offsets.rows() != scm.n_features ||
      scm.env_feature_offsets.cols() != scm.n_envs)
    throw config_error("scm: env_feature_offsets must be p x E");
  if (scm.env_outcome_offsets.size() != scm.n_envs)
    throw config_error("scm: env_outcome_offsets must have E entries");
  if (scm.hidden_to_features.rows() != scm.n_features ||
      scm.hidden_to_features.cols() != scm.n_hidden)
    throw config_error("scm: hidden_to_features must be p x q");
  if (scm.hidden_to_outcome.size() != scm.n_hidden)
    throw config_error("scm: hidden_to_outcome must have q entries");
  if (scm.causal_coef.size() != scm.n_features)
    throw config_error("scm: causal_coef must have p entries");
  if (scm.feature_noise < 0.0 || scm.outcome_noise < 0.0)
    throw config_error("scm: noise scales must be >= 0");
}

namespace {

Eigen::MatrixXd draw_matrix(Rng& rng, int rows, int cols, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

}  // namespace

AnchorSCM canonical_scm(Task task) {
  AnchorSCM scm;
  scm.n_envs = 3;
  scm.n_hidden = 1;
  scm.n_features = 5;
  scm.seed = 0xC0FFEEULL;
  scm.task = task;
  Rng rng(0x5EEDCA4AULL);
  // Environments shift the features along the hidden confounder's direction
  // with centered, deliberately unequal magnitudes (one strongly shifted
  // environment), so the heterogeneity exposes the confounding bias without
  // moving the pooled mean. Outcome offsets follow the same pattern.
  const Eigen::VectorXd confound_dir = draw_matrix(rng, scm.n_features, 1, 1.2);
  Eigen::VectorXd env_scale(scm.n_envs);
  env_scale << -0.15, -0.85, 1.0;
  Eigen::MatrixXd jitter = draw_matrix(rng, scm.n_features, scm.n_envs, 0.1);
  jitter.colwise() -= jitter.rowwise().mean();
  scm.env_feature_offsets = 0.9 * confound_dir * env_scale.transpose() + jitter;
  Eigen::VectorXd outcome_jitter = draw_matrix(rng, scm.n_envs, 1, 0.1);
  outcome_jitter.array() -= outcome_jitter.mean();
  scm.env_outcome_offsets = 0.8 * env_scale + outcome_jitter;
  scm.hidden_to_features = confound_dir;
  scm.hidden_to_outcome = Eigen::VectorXd::Constant(1, 2.5);
  scm.causal_coef = draw_matrix(rng, scm.n_features, 1, 1.0);
  scm.feature_noise = 1.0;
  scm.outcome_noise = task == Task::regression ? 0.5 : 1.0;
  return scm;
}

AnchorSCM just_identified_iv_scm() {
  AnchorSCM scm;
  scm.n_envs = 3;
  scm.n_hidden = 1;
  scm.n_features = 2;
  scm.seed = 0x1EEDULL;
  scm.task = Task::regression;
  Rng rng(0x1A57ULL);
  scm.env_feature_offsets = draw_matrix(rng, 2, 3, 2.0);
  scm.env_outcome_offsets = Eigen::VectorXd::Zero(3);  // instruments stay excluded
  scm.hidden_to_features = draw_matrix(rng, 2, 1, 1.0);
  scm.hidden_to_outcome = Eigen::VectorXd::Constant(1, 2.0);
  scm.causal_coef = draw_matrix(rng, 2, 1, 1.0);
  scm.feature_noise = 1.0;
  scm.outcome_noise = 0.5;
  return scm;
}

Dataset generate_seeded(const AnchorSCM& scm, int64_t n, double shift_scale, uint64_t seed) {
  validate_scm(scm);
  if (n < 1) throw config_error("scm: n must be >= 1");
  if (shift_scale < 0.0) throw config_error("scm: shift_scale must be >= 0");
  Rng rng(seed);

  Dataset d;
  d.task = scm.task;
  d.features.resize(n, scm.n_features);
  d.outcome.resize(n);
  d.column_names.resize(scm.n_features);
  for (int j = 0; j < scm.n_features; ++j) d.column_names[j] = "x" + std::to_string(j + 1);
  d.outcome_name = "y";
  d.anchor_names = {"env"};

  DiscreteAnchor disc;
  disc.labels.resize(scm.n_envs);
  for (int e = 0; e < scm.n_envs; ++e) disc.labels[e] = "e" + std::to_string(e);
  disc.env.resize(n);
  for (int64_t i = 0; i < n; ++i)
    disc.env[i] = static_cast<int32_t>(rng.below(static_cast<uint64_t>(scm.n_envs)));
  // Guarantee every environment appears.
  for (int e = 0; e < scm.n_envs && e < n; ++e) disc.env[e] = static_cast<int32_t>(e);

  Eigen::VectorXd hidden(scm.n_hidden);
  Eigen::VectorXd x(scm.n_features);
  for (int64_t i = 0; i < n; ++i) {
    const int e = disc.env[i];
    for (int q = 0; q < scm.n_hidden; ++q) hidden[q] = rng.normal();
    for (int j = 0; j < scm.n_features; ++j) {
      x[j] = shift_scale * scm.env_feature_offsets(j, e) + scm.feature_noise * rng.normal();
    }
    if (scm.n_hidden > 0) x += scm.hidden_to_features * hidden;
    const double latent = scm.causal_coef.dot(x) + shift_scale * scm.env_outcome_offsets[e] +
                          (scm.n_hidden > 0 ? scm.hidden_to_outcome.dot(hidden) : 0.0) +
                          scm.outcome_noise * rng.normal();
    d.features.row(i) = x;
    d.outcome[i] = scm.task == Task::regression ? latent : (latent >= 0.0 ? 1.0 : -1.0);
  }
  d.anchor = std::move(disc);
  validate_dataset(d);
  return d;
}

Dataset generate(const AnchorSCM& scm, int64_t n, double shift_scale) {
  return generate_seeded(scm, n, shift_scale, scm.seed);
}

WorstCaseRisk worst_case_risk(const Predictor& predict, const AnchorSCM& scm,
                              const std::vector<double>& shift_scales, int64_t n_test) {
  if (shift_scales.empty()) throw config_error("worst_case_risk: empty scale grid");
  if (scm.task != Task::regression)
    throw config_error("worst_case_risk evaluates regression MSE");
  WorstCaseRisk out;
  out.shift_scales = shift_scales;
  out.max_mse = 0.0;
  for (size_t j = 0; j < shift_scales.size(); ++j) {
    const Dataset test =
        generate_seeded(scm, n_test, shift_scales[j], mix_seed(scm.seed, 1000 + j));
    const Eigen::VectorXd pred = predict(test.features);
    out.mse.push_back(mse(pred, test.outcome));
    out.max_mse = std::max(out.max_mse, out.mse.back());
  }
  return out;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int64_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int64_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const int64_t rows = static_cast<int64_t>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const int64_t cols = static_cast<int64_t>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  return m;
}

}  // namespace

std::string scm_to_json(const AnchorSCM& scm) {
  nlohmann::json j;
  j["format"] = "anchorkit-scm";
  j["version"] = 1;
  j["n_envs"] = scm.n_envs;
  j["n_hidden"] = scm.n_hidden;
  j["n_features"] = scm.n_features;
  j["env_feature_offsets"] = matrix_to_json(scm.env_feature_offsets);
  j["env_outcome_offsets"] = matrix_to_json(scm.env_outcome_offsets);
  j["hidden_to_features"] = matrix_to_json(scm.hidden_to_features);
  j["hidden_to_outcome"] = matrix_to_json(scm.hidden_to_outcome);
  j["causal_coef"] = matrix_to_json(scm.causal_coef);
  j["feature_noise"] = scm.feature_noise;
  j["outcome_noise"] = scm.outcome_noise;
  j["seed"] = scm.seed;
  j["task"] = scm.task == Task::regression ? "regression" : "classification";
  return j.dump(2) + "\n";
}

AnchorSCM scm_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw config_error(std::string("scm parse error: ") + e.what());
  }
  if (j.value("format", "") != "anchorkit-scm") throw config_error("not an scm file");
  AnchorSCM scm;
  scm.n_envs = j.at("n_envs").get<int>();
  scm.n_hidden = j.at("n_hidden").get<int>();
  scm.n_features = j.at("n_features").get<int>();
  scm.env_feature_offsets = matrix_from_json(j.at("env_feature_offsets"));
  scm.env_outcome_offsets = matrix_from_json(j.at("env_outcome_offsets"));
  scm.hidden_to_features = matrix_from_json(j.at("hidden_to_features"));
  scm.hidden_to_outcome = matrix_from_json(j.at("hidden_to_outcome"));
  scm.causal_coef = matrix_from_json(j.at("causal_coef"));
  scm.feature_noise = j.at("feature_noise").get<double>();
  scm.outcome_noise = j.at("outcome_noise").get<double>();
  scm.seed = j.at("seed").get<uint64_t>();
  scm.task = j.at("task").get<std::string>() == "classification" ? Task::classification
                                                                 : Task::regression;
  validate_scm(scm);
  return scm;
}

void save_scm(const AnchorSCM& scm, const std::string& path) {
  atomic_write_file(path, scm_to_json(scm));
}

AnchorSCM load_scm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open scm file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scm_from_json(buf.str());
}

}  // namespace anchor
