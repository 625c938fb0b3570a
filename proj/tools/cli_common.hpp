#pragma once

#include <CLI11.hpp>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "anchor/boosting.hpp"
#include "anchor/dataset.hpp"
#include "anchor/errors.hpp"
#include "anchor/linear.hpp"

namespace cli {

// JSON run-config file whose keys mirror the long option names. Flags given
// on the command line win; unknown keys are rejected.
class JsonConfig {
 public:
  JsonConfig() = default;
  explicit JsonConfig(const std::string& path);

  void check_known(const std::set<std::string>& known) const;
  bool has(const std::string& key) const { return loaded_ && j_.contains(key); }

  // Returns true when the config supplied the value (command line wins).
  template <class T>
  bool apply(const CLI::App* cmd, const std::string& flag, const std::string& key, T* out) const {
    if (!loaded_) return false;
    if (cmd->count("--" + flag) > 0) return false;
    if (!j_.contains(key)) return false;
    try {
      *out = j_.at(key).get<T>();
    } catch (const std::exception& e) {
      throw anchor::config_error("config key '" + key + "': " + e.what());
    }
    return true;
  }

 private:
  bool loaded_ = false;
  nlohmann::json j_;
};

// Options describing how to load a dataset CSV.
struct DataOpts {
  std::string data_path;
  std::string schema_path;
  std::string outcome_col = "y";
  std::vector<std::string> anchor_cols = {"env"};
  std::string group_col;
  std::string task = "regression";

  // Set by add_options; used to tell explicit flags from defaults when a
  // schema sidecar is present. Run-config values count as explicit too.
  CLI::Option* outcome_opt = nullptr;
  CLI::Option* anchor_opt = nullptr;
  CLI::Option* group_opt = nullptr;
  CLI::Option* task_opt = nullptr;
  bool outcome_from_config = false;
  bool anchor_from_config = false;
  bool group_from_config = false;
  bool task_from_config = false;

  void add_options(CLI::App* cmd, const std::string& flag_prefix = "");
  anchor::Dataset load() const;
  anchor::Task parsed_task() const;
};

// Model-kind-agnostic handle used by predict/evaluate/refit.
struct AnyModel {
  std::optional<anchor::LinearAnchorModel> linear;
  std::optional<anchor::BoostedAnchorModel> boosted;

  static AnyModel load(const std::string& path);
  Eigen::VectorXd predict(const anchor::Dataset& d) const;
  Eigen::VectorXd predict_scores(const Eigen::MatrixXd& features) const;
  anchor::Task task() const;
  double gamma() const;
};

// Machine-parseable single-line error and exit-code mapping:
// 0 ok, 2 config, 3 data, 4 numerical.
int run_guarded(const std::function<void()>& body);

}  // namespace cli
