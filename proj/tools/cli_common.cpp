#include "cli_common.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace cli {

using namespace anchor;

JsonConfig::JsonConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  try {
    in >> j_;
  } catch (const std::exception& e) {
    throw config_error("config file " + path + ": " + e.what());
  }
  if (!j_.is_object()) throw config_error("config file must hold a JSON object");
  loaded_ = true;
}

void JsonConfig::check_known(const std::set<std::string>& known) const {
  if (!loaded_) return;
  for (auto it = j_.begin(); it != j_.end(); ++it) {
    if (!known.count(it.key()))
      throw config_error("config file: unknown key '" + it.key() + "'");
  }
}

void DataOpts::add_options(CLI::App* cmd, const std::string& flag_prefix) {
  const std::string p = flag_prefix;
  cmd->add_option("--" + p + "data", data_path, "Input CSV file")->required();
  cmd->add_option("--" + p + "schema", schema_path, "JSON sidecar schema file");
  outcome_opt = cmd->add_option("--" + p + "outcome-col", outcome_col, "Outcome column name");
  anchor_opt = cmd->add_option("--" + p + "anchor-cols", anchor_cols, "Anchor column names");
  group_opt = cmd->add_option("--" + p + "group-col", group_col,
                              "Sampling-unit (patient id) column");
  task_opt = cmd->add_option("--" + p + "task", task, "regression | classification");
}

Task DataOpts::parsed_task() const {
  if (task == "regression") return Task::regression;
  if (task == "classification") return Task::classification;
  throw config_error("unknown task: '" + task + "'");
}

Dataset DataOpts::load() const {
  DataOpts effective = *this;
  std::string sidecar = schema_path;
  if (sidecar.empty()) {
    const std::string candidate = data_path + ".schema.json";
    if (std::filesystem::exists(candidate)) sidecar = candidate;
  }
  if (!sidecar.empty()) {
    const DatasetSchema s = read_schema_sidecar(sidecar);
    const auto given = [](const CLI::Option* opt, bool from_config) {
      return from_config || (opt && opt->count() > 0);
    };
    if (!s.outcome_col.empty() && !given(outcome_opt, outcome_from_config))
      effective.outcome_col = s.outcome_col;
    if (!s.anchor_cols.empty() && !given(anchor_opt, anchor_from_config))
      effective.anchor_cols = s.anchor_cols;
    if (!s.group_col.empty() && !given(group_opt, group_from_config))
      effective.group_col = s.group_col;
    if (!s.task.empty() && !given(task_opt, task_from_config)) effective.task = s.task;
  }
  return load_csv(effective.data_path, effective.outcome_col, effective.anchor_cols,
                  effective.parsed_task(), effective.group_col);
}

AnyModel AnyModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open model file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw data_error(std::string("model parse error: ") + e.what());
  }
  AnyModel m;
  const std::string format = j.value("format", "");
  if (format == "anchorkit-linear") {
    m.linear = linear_model_from_json(text);
  } else if (format == "anchorkit-boosted") {
    m.boosted = boosted_model_from_json(text);
  } else {
    throw data_error("unrecognized model format in " + path);
  }
  return m;
}

Eigen::VectorXd AnyModel::predict(const Dataset& d) const {
  return linear ? linear->predict(d) : boosted->predict(d);
}

Eigen::VectorXd AnyModel::predict_scores(const Eigen::MatrixXd& features) const {
  return linear ? linear->predict(features) : boosted->predict(features);
}

Task AnyModel::task() const { return linear ? linear->task : boosted->task(); }

double AnyModel::gamma() const { return linear ? linear->gamma : boosted->config.gamma; }

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const config_error& e) {
    std::cerr << "error code=config message=\"" << e.what() << "\"\n";
    return 2;
  } catch (const data_error& e) {
    std::cerr << "error code=data message=\"" << e.what() << "\"\n";
    return 3;
  } catch (const numeric_error& e) {
    std::cerr << "error code=numeric message=\"" << e.what() << "\"\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error code=internal message=\"" << e.what() << "\"\n";
    return 1;
  }
}

}  // namespace cli
