#include "cmd_regimes.hpp"

#include <charconv>
#include <cmath>
#include <iostream>

#include <json.hpp>

#include "anchor/boosting.hpp"
#include "anchor/csv.hpp"
#include "anchor/errors.hpp"
#include "anchor/linear.hpp"
#include "anchor/metrics.hpp"
#include "anchor/selection.hpp"

namespace cli {

using namespace anchor;

namespace {

double parse_cell(const std::string& cell, const std::string& path, size_t line) {
  double v;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw data_error(path + ": line " + std::to_string(line) + ": cannot parse '" + cell + "'");
  return v;
}

MetricOrientation orientation_for(const std::string& metric, const std::string& requested) {
  if (requested == "lower") return MetricOrientation::lower_better;
  if (requested == "higher") return MetricOrientation::higher_better;
  if (requested != "auto") throw config_error("orientation must be auto, lower, or higher");
  return metric == "auprc" ? MetricOrientation::higher_better
                           : MetricOrientation::lower_better;
}

BoostConfig boosted_config(const RegimeRunOpts& o, double gamma, Link link) {
  BoostConfig c;
  c.num_trees = o.trees;
  c.max_depth = o.max_depth;
  c.learning_rate = o.learning_rate;
  c.min_gain_to_split = o.min_gain;
  c.min_samples_leaf = o.min_samples_leaf;
  c.histogram_bins = o.bins;
  c.gamma = gamma;
  c.link = link;
  return c;
}

double score_of(const Eigen::VectorXd& scores, const Dataset& test) {
  return test.task == Task::regression ? mse(scores, test.outcome)
                                       : probit_nll(scores, test.outcome);
}

}  // namespace

std::string render_curves_csv(const std::vector<CurvePoint>& points, const std::string& metric) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(points.size());
  for (const auto& pt : points) {
    rows.push_back({strategy_to_string(pt.strategy), std::to_string(pt.seed),
                    std::to_string(pt.n_patients), metric, format_double(pt.value)});
  }
  return render_csv({"strategy", "seed", "n", "metric", "value"}, rows);
}

std::vector<CurvePoint> parse_curves_csv(const std::string& path,
                                         const std::string& orientation,
                                         std::string* metric_out) {
  const CsvTable table = read_csv_file(path);
  const int s_idx = table.column_index("strategy");
  const int seed_idx = table.column_index("seed");
  const int n_idx = table.column_index("n");
  const int m_idx = table.column_index("metric");
  const int v_idx = table.column_index("value");
  if (s_idx < 0 || seed_idx < 0 || n_idx < 0 || m_idx < 0 || v_idx < 0)
    throw data_error(path + ": expected header strategy,seed,n,metric,value");
  std::vector<CurvePoint> points;
  std::string metric;
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const size_t line = i + 2;  // header is line 1, no blank lines in our files
    CurvePoint pt;
    pt.strategy = strategy_from_string(row[s_idx]);
    pt.seed = static_cast<uint64_t>(parse_cell(row[seed_idx], path, line));
    pt.n_patients = static_cast<int64_t>(parse_cell(row[n_idx], path, line));
    if (pt.n_patients <= 0)
      throw data_error(path + ": line " + std::to_string(line) + ": n must be positive");
    pt.value = parse_cell(row[v_idx], path, line);
    if (metric.empty()) metric = row[m_idx];
    pt.orientation = orientation_for(metric, orientation);
    points.push_back(pt);
  }
  if (points.empty()) throw data_error(path + ": no curve points");
  if (metric_out) *metric_out = metric;
  return points;
}

std::string render_transitions_json(const TransitionPoints& tp) {
  nlohmann::json j;
  j["circle"] = tp.circle ? nlohmann::json(*tp.circle) : nlohmann::json(nullptr);
  j["square"] = tp.square ? nlohmann::json(*tp.square) : nlohmann::json(nullptr);
  j["cross"] = tp.cross ? nlohmann::json(*tp.cross) : nlohmann::json(nullptr);
  j["flags"] = {{"circle", tp.circle_flag}, {"square", tp.square_flag}, {"cross", tp.cross_flag}};
  j["tolerance"] = {{"rule", "factor times the 10-90% inter-seed band width of the moving curve"},
                    {"factor", tp.tolerance_factor}};
  return j.dump(2) + "\n";
}

namespace {

// target_only for linear models: 5-fold selection of lambda on the
// subsample over the lambda_max-based grid, then a final fit.
Eigen::VectorXd linear_target_only(const RegimeRunOpts& o, const Dataset& sub,
                                   const Dataset& test) {
  std::vector<double> lambdas = {0.0};
  if (sub.task == Task::regression) {
    const double lmax = lambda_max(sub);
    if (lmax > 0.0) lambdas = {lmax / 100.0, lmax / 1000.0, lmax / 10000.0};
  }
  double best_lambda = lambdas.front();
  if (lambdas.size() > 1) {
    std::vector<RefitCandidate> grid;
    for (double l : lambdas) grid.push_back({1.0, l});
    const RefitEvaluator eval = [&](const RefitCandidate& c, const Dataset& fold_train,
                                    const Dataset& fold_test) {
      const ElasticNetSpec enet{c.param, o.eta};
      return sub.task == Task::regression
                 ? fit_linear_anchor(fold_train, 1.0, enet).predict(fold_test.features)
                 : fit_linear_anchor_classification(fold_train, 1.0, enet)
                       .predict(fold_test.features);
    };
    best_lambda = kfold_refit_select(grid, sub, o.folds, eval).selected.param;
  }
  const ElasticNetSpec enet{best_lambda, o.eta};
  const LinearAnchorModel m = sub.task == Task::regression
                                  ? fit_linear_anchor(sub, 1.0, enet)
                                  : fit_linear_anchor_classification(sub, 1.0, enet);
  return m.predict(test.features);
}

// target_only for boosted models: 5-fold selection of the tree count by
// prefix evaluation of a single fit per fold.
Eigen::VectorXd boosted_target_only(const RegimeRunOpts& o, const Dataset& sub,
                                    const Dataset& test) {
  const Link link = sub.task == Task::regression ? Link::identity : Link::probit;
  BoostConfig config = boosted_config(o, 1.0, link);
  config.min_samples_leaf = std::min<int>(config.min_samples_leaf,
                                          std::max<int>(2, static_cast<int>(sub.n_rows() / 8)));
  std::vector<int> tree_grid;
  for (int t = config.num_trees; t >= 10; t /= 2) tree_grid.push_back(t);

  const std::vector<int> fold = kfold_assignment(sub, o.folds);
  std::vector<double> score(tree_grid.size(), 0.0);
  for (int f = 0; f < o.folds; ++f) {
    std::vector<int64_t> train_rows, test_rows;
    for (int64_t i = 0; i < sub.n_rows(); ++i)
      (fold[i] == f ? test_rows : train_rows).push_back(i);
    const Dataset ftrain = subset_rows(sub, train_rows);
    const Dataset ftest = subset_rows(sub, test_rows);
    const BoostedAnchorModel m = fit_boosted(ftrain, config);
    for (size_t ti = 0; ti < tree_grid.size(); ++ti) {
      const Eigen::VectorXd scores =
          predict_boosted_prefix(m, ftest.features, tree_grid[ti]);
      score[ti] += score_of(scores, ftest) / o.folds;
    }
  }
  size_t best = 0;
  for (size_t ti = 1; ti < tree_grid.size(); ++ti)
    if (score[ti] < score[best]) best = ti;
  config.num_trees = tree_grid[best];
  return fit_boosted(sub, config).predict(test.features);
}

}  // namespace

void run_regimes(const RegimeRunOpts& o) {
  std::vector<CurvePoint> points;
  std::string metric;

  if (!o.full_mode) {
    points = parse_curves_csv(o.curves_path, o.orientation, &metric);
  } else {
    const Task task = o.target_pool.task;
    metric = task == Task::regression ? "mse" : "nll";
    const MetricOrientation orientation = orientation_for(metric, o.orientation);
    const Link link = task == Task::regression ? Link::identity : Link::probit;

    // Per-gamma source models.
    std::vector<LinearAnchorModel> linear_sources;
    std::vector<BoostedAnchorModel> boosted_sources;
    for (double gamma : o.gamma_grid) {
      if (o.model_kind == "linear") {
        linear_sources.push_back(
            task == Task::regression
                ? fit_linear_anchor(o.source, gamma, {o.lambda, o.eta})
                : fit_linear_anchor_classification(o.source, gamma, {o.lambda, o.eta}));
      } else {
        boosted_sources.push_back(fit_boosted(o.source, boosted_config(o, gamma, link)));
      }
    }
    auto source_by_gamma = [&](double gamma) -> size_t {
      for (size_t i = 0; i < o.gamma_grid.size(); ++i)
        if (o.gamma_grid[i] == gamma) return i;
      throw config_error("gamma not in grid");
    };

    // source_only: gamma chosen on source data alone by LOEO-CV, then a
    // single evaluation on the held-out target test split.
    const GammaTrainer loeo_trainer = [&](const Dataset& train, double gamma,
                                          const Dataset& test) {
      if (o.model_kind == "linear") {
        return task == Task::regression
                   ? fit_linear_anchor(train, gamma, {o.lambda, o.eta}).predict(test.features)
                   : fit_linear_anchor_classification(train, gamma, {o.lambda, o.eta})
                         .predict(test.features);
      }
      return fit_boosted(train, boosted_config(o, gamma, link)).predict(test.features);
    };
    const double source_gamma =
        loeo_select_gamma(o.source, o.gamma_grid, loeo_trainer).selected_gamma;
    const size_t source_idx = source_by_gamma(source_gamma);
    const double source_value =
        o.model_kind == "linear"
            ? score_of(linear_sources[source_idx].predict(o.target_test.features), o.target_test)
            : score_of(boosted_sources[source_idx].predict(o.target_test.features),
                       o.target_test);

    std::vector<uint64_t> seeds;
    for (int s = 1; s <= o.n_seeds; ++s) seeds.push_back(static_cast<uint64_t>(s));

    const SubsampleEvaluator source_eval = [&](const Dataset&, uint64_t) {
      return source_value;
    };

    const SubsampleEvaluator refit_eval = [&](const Dataset& sub, uint64_t) {
      std::vector<RefitCandidate> grid;
      for (double gamma : o.gamma_grid)
        for (double param : o.param_grid) grid.push_back({gamma, param});
      const RefitEvaluator eval = [&](const RefitCandidate& c, const Dataset& fold_train,
                                      const Dataset& fold_test) {
        const size_t idx = source_by_gamma(c.gamma);
        if (o.model_kind == "linear") {
          return refit_empirical_bayes(linear_sources[idx], fold_train, c.param,
                                       {o.lambda, o.eta})
              .predict(fold_test.features);
        }
        return refit_leaves(boosted_sources[idx], fold_train, c.param)
            .predict(fold_test.features);
      };
      const RefitCandidate chosen = kfold_refit_select(grid, sub, o.folds, eval).selected;
      const size_t idx = source_by_gamma(chosen.gamma);
      const Eigen::VectorXd scores =
          o.model_kind == "linear"
              ? refit_empirical_bayes(linear_sources[idx], sub, chosen.param, {o.lambda, o.eta})
                    .predict(o.target_test.features)
              : refit_leaves(boosted_sources[idx], sub, chosen.param)
                    .predict(o.target_test.features);
      return score_of(scores, o.target_test);
    };

    const SubsampleEvaluator target_eval = [&](const Dataset& sub, uint64_t) {
      const Eigen::VectorXd scores = o.model_kind == "linear"
                                         ? linear_target_only(o, sub, o.target_test)
                                         : boosted_target_only(o, sub, o.target_test);
      return score_of(scores, o.target_test);
    };

    std::vector<std::string> warnings;
    for (const auto& [strategy, eval] :
         std::vector<std::pair<Strategy, const SubsampleEvaluator*>>{
             {Strategy::source_only, &source_eval},
             {Strategy::refit, &refit_eval},
             {Strategy::target_only, &target_eval}}) {
      const SubsampleResult res =
          subsample_curve(o.target_pool, o.sizes, seeds, strategy, orientation, *eval);
      points.insert(points.end(), res.points.begin(), res.points.end());
      warnings.insert(warnings.end(), res.warnings.begin(), res.warnings.end());
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  }

  if (!o.out_curves.empty()) atomic_write_file(o.out_curves, render_curves_csv(points, metric));

  const RegimeCurves curves = build_regime_curves(points);
  const TransitionPoints tp = transition_points(curves);
  const std::string json = render_transitions_json(tp);
  if (!o.out_transitions.empty()) {
    atomic_write_file(o.out_transitions, json);
  }
  std::cout << json;
}

}  // namespace cli
