#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace anchor {

enum class Task { regression, classification };

// One-hot environment anchor, stored as per-row indices into `labels`.
struct DiscreteAnchor {
  std::vector<int32_t> env;  // n values in [0, labels.size())
  std::vector<std::string> labels;
};

struct ContinuousAnchor {
  Eigen::MatrixXd columns;  // n x k, k >= 1
  std::vector<std::string> names;
};

using AnchorSpec = std::variant<DiscreteAnchor, ContinuousAnchor>;

// Row-aligned tabular dataset. Immutable by convention after construction;
// all fitting code takes it by const reference.
struct Dataset {
  Eigen::MatrixXd features;  // n x p
  Eigen::VectorXd outcome;   // n; {-1, +1} for classification
  AnchorSpec anchor;
  std::vector<std::string> column_names;  // p feature names
  Task task = Task::regression;

  // Optional sampling-unit (patient) ids; empty when the data has none.
  std::vector<int64_t> groups;
  std::string outcome_name = "y";
  std::vector<std::string> anchor_names;
  std::string group_name;

  int64_t n_rows() const { return features.rows(); }
  int n_features() const { return static_cast<int>(features.cols()); }
  bool has_groups() const { return !groups.empty(); }
  bool discrete_anchor() const { return std::holds_alternative<DiscreteAnchor>(anchor); }
};

// Checks every Dataset invariant; throws data_error on violation.
void validate_dataset(const Dataset& d);

// Loads a CSV file. Every column that is not the outcome, an anchor column,
// or the group column becomes a feature and must be numeric. A single
// non-numeric anchor column yields a discrete anchor; numeric anchor columns
// yield a continuous one. {0,1} classification outcomes map to {-1,+1}.
Dataset load_csv(const std::string& path, const std::string& outcome_col,
                 const std::vector<std::string>& anchor_cols, Task task,
                 const std::string& group_col = "");

// Optional JSON sidecar naming the special columns in place of CLI flags.
struct DatasetSchema {
  std::string outcome_col;
  std::vector<std::string> anchor_cols;
  std::string group_col;
  std::string task;  // "regression" | "classification" | empty
};
DatasetSchema read_schema_sidecar(const std::string& path);

std::string render_dataset_csv(const Dataset& d);
void write_dataset_csv(const Dataset& d, const std::string& path);

// Partition by a discrete anchor label: rows with env != holdout go to
// train, the rest to test. Train keeps the remaining labels.
std::pair<Dataset, Dataset> split_by_environment(const Dataset& d, const std::string& holdout);

// Row subset (indices into d). Discrete anchors are compacted so that every
// surviving environment keeps at least one row.
Dataset subset_rows(const Dataset& d, const std::vector<int64_t>& rows);

}  // namespace anchor
