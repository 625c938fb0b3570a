#include "anchor/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "anchor/csv.hpp"
#include "anchor/errors.hpp"

namespace anchor {

namespace {

bool parse_double(const std::string& cell, double* out) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto res = std::from_chars(first, last, *out);
  return res.ec == std::errc() && res.ptr == last && !cell.empty();
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

void validate_dataset(const Dataset& d) {
  const int64_t n = d.features.rows();
  if (d.outcome.size() != n) throw data_error("outcome length does not match feature rows");
  if (static_cast<int64_t>(d.column_names.size()) != d.features.cols())
    throw data_error("column_names length does not match feature columns");
  if (!d.groups.empty() && static_cast<int64_t>(d.groups.size()) != n)
    throw data_error("groups length does not match feature rows");
  if (!d.features.allFinite()) throw data_error("features contain NaN or Inf");
  if (!d.outcome.allFinite()) throw data_error("outcome contains NaN or Inf");
  if (d.task == Task::classification) {
    for (int64_t i = 0; i < n; ++i) {
      const double y = d.outcome[i];
      if (y != -1.0 && y != 1.0)
        throw data_error("classification outcome outside {-1,+1} at row " + std::to_string(i + 1));
    }
  }
  if (const auto* disc = std::get_if<DiscreteAnchor>(&d.anchor)) {
    if (disc->labels.empty()) throw data_error("discrete anchor has no environments");
    if (static_cast<int64_t>(disc->env.size()) != n)
      throw data_error("anchor length does not match feature rows");
    std::vector<int64_t> counts(disc->labels.size(), 0);
    for (int32_t e : disc->env) {
      if (e < 0 || e >= static_cast<int32_t>(disc->labels.size()))
        throw data_error("environment index out of range");
      ++counts[e];
    }
    for (size_t e = 0; e < counts.size(); ++e)
      if (counts[e] == 0)
        throw data_error("environment '" + disc->labels[e] + "' has no rows");
  } else {
    const auto& cont = std::get<ContinuousAnchor>(d.anchor);
    if (cont.columns.rows() != n) throw data_error("anchor rows do not match feature rows");
    if (cont.columns.cols() < 1) throw data_error("continuous anchor needs at least one column");
    if (!cont.columns.allFinite()) throw data_error("anchor contains NaN or Inf");
  }
}

Dataset load_csv(const std::string& path, const std::string& outcome_col,
                 const std::vector<std::string>& anchor_cols, Task task,
                 const std::string& group_col) {
  const CsvTable table = read_csv_file(path);

  const int y_idx = table.column_index(outcome_col);
  if (y_idx < 0) throw config_error("outcome column '" + outcome_col + "' not found");
  std::vector<int> a_idx;
  for (const auto& name : anchor_cols) {
    const int idx = table.column_index(name);
    if (idx < 0) throw config_error("anchor column '" + name + "' not found");
    a_idx.push_back(idx);
  }
  if (a_idx.empty()) throw config_error("at least one anchor column is required");
  int g_idx = -1;
  if (!group_col.empty()) {
    g_idx = table.column_index(group_col);
    if (g_idx < 0) throw config_error("group column '" + group_col + "' not found");
  }

  std::vector<int> feat_idx;
  std::vector<std::string> feat_names;
  for (size_t c = 0; c < table.header.size(); ++c) {
    const int ci = static_cast<int>(c);
    if (ci == y_idx || ci == g_idx) continue;
    if (std::find(a_idx.begin(), a_idx.end(), ci) != a_idx.end()) continue;
    feat_idx.push_back(ci);
    feat_names.push_back(table.header[c]);
  }

  const int64_t n = static_cast<int64_t>(table.rows.size());
  if (n == 0) throw data_error(path + ": no data rows");
  const int p = static_cast<int>(feat_idx.size());

  Dataset d;
  d.task = task;
  d.features.resize(n, p);
  d.outcome.resize(n);
  d.column_names = feat_names;
  d.outcome_name = outcome_col;
  d.anchor_names = anchor_cols;
  d.group_name = group_col;

  for (int64_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    for (int j = 0; j < p; ++j) {
      double v;
      if (!parse_double(row[feat_idx[j]], &v) || !std::isfinite(v)) {
        throw data_error(path + ": invalid feature value '" + row[feat_idx[j]] + "' at row " +
                         std::to_string(i + 1) + ", column '" + feat_names[j] + "'");
      }
      d.features(i, j) = v;
    }
    double y;
    if (!parse_double(row[y_idx], &y) || !std::isfinite(y)) {
      throw data_error(path + ": invalid outcome value '" + row[y_idx] + "' at row " +
                       std::to_string(i + 1));
    }
    if (task == Task::classification) {
      if (y == 0.0 || y == -1.0) {
        y = -1.0;
      } else if (y == 1.0) {
        y = 1.0;
      } else {
        throw data_error(path + ": classification outcome '" + row[y_idx] + "' at row " +
                         std::to_string(i + 1) + " is outside {0,1,-1,+1}");
      }
    }
    d.outcome[i] = y;
  }

  // Anchor: a single column that fails numeric parsing is discrete; numeric
  // columns form a continuous anchor matrix.
  bool all_numeric = true;
  for (int idx : a_idx) {
    for (int64_t i = 0; i < n && all_numeric; ++i) {
      double v;
      if (!parse_double(table.rows[i][idx], &v)) all_numeric = false;
    }
  }
  if (!all_numeric) {
    if (a_idx.size() != 1)
      throw config_error("multiple anchor columns must all be numeric");
    DiscreteAnchor disc;
    disc.env.resize(n);
    std::unordered_map<std::string, int32_t> ids;
    for (int64_t i = 0; i < n; ++i) {
      const std::string& label = table.rows[i][a_idx[0]];
      auto [it, inserted] = ids.emplace(label, static_cast<int32_t>(disc.labels.size()));
      if (inserted) disc.labels.push_back(label);
      disc.env[i] = it->second;
    }
    d.anchor = std::move(disc);
  } else {
    ContinuousAnchor cont;
    cont.columns.resize(n, static_cast<int64_t>(a_idx.size()));
    cont.names = anchor_cols;
    for (int64_t i = 0; i < n; ++i) {
      for (size_t k = 0; k < a_idx.size(); ++k) {
        double v;
        parse_double(table.rows[i][a_idx[k]], &v);
        if (!std::isfinite(v))
          throw data_error(path + ": non-finite anchor value at row " + std::to_string(i + 1));
        cont.columns(i, static_cast<int64_t>(k)) = v;
      }
    }
    d.anchor = std::move(cont);
  }

  if (g_idx >= 0) {
    d.groups.resize(n);
    std::unordered_map<std::string, int64_t> ids;
    for (int64_t i = 0; i < n; ++i) {
      const std::string& g = table.rows[i][g_idx];
      auto [it, inserted] = ids.emplace(g, static_cast<int64_t>(ids.size()));
      d.groups[i] = it->second;
    }
  }

  validate_dataset(d);
  return d;
}

DatasetSchema read_schema_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open schema file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error("schema file " + path + ": " + e.what());
  }
  static const std::set<std::string> known = {"outcome_col", "anchor_cols", "group_col", "task"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw config_error("schema file: unknown key '" + it.key() + "'");
  }
  DatasetSchema s;
  if (j.contains("outcome_col")) s.outcome_col = j["outcome_col"].get<std::string>();
  if (j.contains("anchor_cols")) s.anchor_cols = j["anchor_cols"].get<std::vector<std::string>>();
  if (j.contains("group_col")) s.group_col = j["group_col"].get<std::string>();
  if (j.contains("task")) s.task = j["task"].get<std::string>();
  return s;
}

std::string render_dataset_csv(const Dataset& d) {
  std::vector<std::string> header = d.column_names;
  header.push_back(d.outcome_name);
  if (const auto* disc = std::get_if<DiscreteAnchor>(&d.anchor)) {
    (void)disc;
    header.push_back(d.anchor_names.empty() ? "env" : d.anchor_names[0]);
  } else {
    const auto& cont = std::get<ContinuousAnchor>(d.anchor);
    for (int64_t k = 0; k < cont.columns.cols(); ++k) {
      header.push_back(k < static_cast<int64_t>(cont.names.size()) ? cont.names[k]
                                                                   : "a" + std::to_string(k));
    }
  }
  if (d.has_groups()) header.push_back(d.group_name.empty() ? "group" : d.group_name);

  std::vector<std::vector<std::string>> rows;
  rows.reserve(d.n_rows());
  for (int64_t i = 0; i < d.n_rows(); ++i) {
    std::vector<std::string> row;
    for (int j = 0; j < d.n_features(); ++j) row.push_back(format_double(d.features(i, j)));
    row.push_back(format_double(d.outcome[i]));
    if (const auto* disc = std::get_if<DiscreteAnchor>(&d.anchor)) {
      row.push_back(disc->labels[disc->env[i]]);
    } else {
      const auto& cont = std::get<ContinuousAnchor>(d.anchor);
      for (int64_t k = 0; k < cont.columns.cols(); ++k)
        row.push_back(format_double(cont.columns(i, k)));
    }
    if (d.has_groups()) row.push_back(std::to_string(d.groups[i]));
    rows.push_back(std::move(row));
  }
  return render_csv(header, rows);
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
  atomic_write_file(path, render_dataset_csv(d));
}

Dataset subset_rows(const Dataset& d, const std::vector<int64_t>& rows) {
  Dataset out;
  const int64_t m = static_cast<int64_t>(rows.size());
  if (m == 0) throw data_error("subset_rows: empty selection");
  out.task = d.task;
  out.column_names = d.column_names;
  out.outcome_name = d.outcome_name;
  out.anchor_names = d.anchor_names;
  out.group_name = d.group_name;
  out.features.resize(m, d.features.cols());
  out.outcome.resize(m);
  for (int64_t i = 0; i < m; ++i) {
    out.features.row(i) = d.features.row(rows[i]);
    out.outcome[i] = d.outcome[rows[i]];
  }
  if (const auto* disc = std::get_if<DiscreteAnchor>(&d.anchor)) {
    DiscreteAnchor sub;
    std::vector<int32_t> remap(disc->labels.size(), -1);
    std::vector<bool> seen(disc->labels.size(), false);
    for (int64_t i = 0; i < m; ++i) seen[disc->env[rows[i]]] = true;
    for (size_t e = 0; e < seen.size(); ++e) {
      if (seen[e]) {
        remap[e] = static_cast<int32_t>(sub.labels.size());
        sub.labels.push_back(disc->labels[e]);
      }
    }
    sub.env.resize(m);
    for (int64_t i = 0; i < m; ++i) sub.env[i] = remap[disc->env[rows[i]]];
    out.anchor = std::move(sub);
  } else {
    const auto& cont = std::get<ContinuousAnchor>(d.anchor);
    ContinuousAnchor sub;
    sub.names = cont.names;
    sub.columns.resize(m, cont.columns.cols());
    for (int64_t i = 0; i < m; ++i) sub.columns.row(i) = cont.columns.row(rows[i]);
    out.anchor = std::move(sub);
  }
  if (d.has_groups()) {
    out.groups.resize(m);
    for (int64_t i = 0; i < m; ++i) out.groups[i] = d.groups[rows[i]];
  }
  return out;
}

std::pair<Dataset, Dataset> split_by_environment(const Dataset& d, const std::string& holdout) {
  const auto* disc = std::get_if<DiscreteAnchor>(&d.anchor);
  if (!disc) throw data_error("split_by_environment requires a discrete anchor");
  int32_t hold_id = -1;
  for (size_t e = 0; e < disc->labels.size(); ++e)
    if (disc->labels[e] == holdout) hold_id = static_cast<int32_t>(e);
  if (hold_id < 0) {
    throw data_error("environment '" + holdout + "' not found; available: " +
                     join(disc->labels));
  }
  if (disc->labels.size() < 2)
    throw data_error("cannot hold out '" + holdout + "': it is the only environment");
  std::vector<int64_t> train_rows, test_rows;
  for (int64_t i = 0; i < d.n_rows(); ++i) {
    if (disc->env[i] == hold_id) {
      test_rows.push_back(i);
    } else {
      train_rows.push_back(i);
    }
  }
  return {subset_rows(d, train_rows), subset_rows(d, test_rows)};
}

}  // namespace anchor
