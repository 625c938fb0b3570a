#pragma once

#include <string>
#include <vector>

#include "anchor/dataset.hpp"
#include "anchor/regimes.hpp"

namespace cli {

struct RegimeRunOpts {
  // Mode (a): read an existing curves CSV.
  std::string curves_path;

  // Mode (b): run the full subsampling pipeline.
  anchor::Dataset source;
  anchor::Dataset target_pool;
  anchor::Dataset target_test;
  bool full_mode = false;
  std::string model_kind = "linear";  // linear | boosted
  std::vector<double> gamma_grid;
  std::vector<double> param_grid;  // dr (boosted) or alpha (linear)
  double lambda = 0.0;
  double eta = 1.0;
  int trees = 200;
  int max_depth = 3;
  double learning_rate = 0.1;
  double min_gain = 0.1;
  int min_samples_leaf = 20;
  int bins = 255;
  std::vector<int64_t> sizes;
  int n_seeds = 20;
  int folds = 5;

  std::string orientation = "auto";  // auto | lower | higher
  std::string out_curves;
  std::string out_transitions;
};

void run_regimes(const RegimeRunOpts& opts);

// Curves CSV: strategy,seed,n,metric,value
std::string render_curves_csv(const std::vector<anchor::CurvePoint>& points,
                              const std::string& metric);
std::vector<anchor::CurvePoint> parse_curves_csv(const std::string& path,
                                                 const std::string& orientation,
                                                 std::string* metric_out = nullptr);
std::string render_transitions_json(const anchor::TransitionPoints& tp);

}  // namespace cli
