#include <CLI11.hpp>
#include <iostream>
#include <set>

#include "anchor/boosting.hpp"
#include "anchor/csv.hpp"
#include "anchor/gaussian.hpp"
#include "anchor/linear.hpp"
#include "anchor/metrics.hpp"
#include "anchor/parallel.hpp"
#include "anchor/scm.hpp"
#include "anchor/selection.hpp"
#include "cli_common.hpp"
#include "cmd_regimes.hpp"

using namespace anchor;

namespace {

struct CommonOpts {
  std::string config_path;
  int threads = 0;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run-config file; flags override its keys");
    cmd->add_option("--threads", threads, "Worker threads (0 = hardware)");
  }
  cli::JsonConfig load_config() const {
    return config_path.empty() ? cli::JsonConfig() : cli::JsonConfig(config_path);
  }
  void apply_threads() const {
    if (threads > 0) set_num_threads(threads);
  }
};

struct BoostFlags {
  int trees = 1000;
  double learning_rate = 0.1;
  int max_depth = 3;
  double min_gain = 0.1;
  int min_samples_leaf = 20;
  int bins = 255;
  bool first_order = false;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--trees", trees, "Number of boosting rounds");
    cmd->add_option("--learning-rate", learning_rate, "Shrinkage per round");
    cmd->add_option("--max-depth", max_depth, "Maximum tree depth");
    cmd->add_option("--min-gain", min_gain, "Minimal gain to keep a split");
    cmd->add_option("--min-samples-leaf", min_samples_leaf, "Minimal rows per leaf");
    cmd->add_option("--bins", bins, "Histogram bins per feature");
    cmd->add_flag("--first-order", first_order,
                  "Diagnostic first-order leaf updates (divergent for large gamma)");
  }
  BoostConfig to_config(double gamma, Link link) const {
    BoostConfig c;
    c.num_trees = trees;
    c.learning_rate = learning_rate;
    c.max_depth = max_depth;
    c.min_gain_to_split = min_gain;
    c.min_samples_leaf = min_samples_leaf;
    c.histogram_bins = bins;
    c.gamma = gamma;
    c.link = link;
    c.leaf_update =
        first_order ? LeafUpdateMode::first_order_diagnostic : LeafUpdateMode::second_order;
    return c;
  }
  void merge(const cli::JsonConfig& cfg, const CLI::App* cmd) {
    cfg.apply(cmd, "trees", "trees", &trees);
    cfg.apply(cmd, "learning-rate", "learning_rate", &learning_rate);
    cfg.apply(cmd, "max-depth", "max_depth", &max_depth);
    cfg.apply(cmd, "min-gain", "min_gain", &min_gain);
    cfg.apply(cmd, "min-samples-leaf", "min_samples_leaf", &min_samples_leaf);
    cfg.apply(cmd, "bins", "bins", &bins);
  }
};

void merge_data_opts(cli::DataOpts* d, const cli::JsonConfig& cfg, const CLI::App* cmd) {
  cfg.apply(cmd, "data", "data", &d->data_path);
  cfg.apply(cmd, "schema", "schema", &d->schema_path);
  d->outcome_from_config |= cfg.apply(cmd, "outcome-col", "outcome_col", &d->outcome_col);
  d->anchor_from_config |= cfg.apply(cmd, "anchor-cols", "anchor_cols", &d->anchor_cols);
  d->group_from_config |= cfg.apply(cmd, "group-col", "group_col", &d->group_col);
  d->task_from_config |= cfg.apply(cmd, "task", "task", &d->task);
}

Link link_for(Task task) { return task == Task::regression ? Link::identity : Link::probit; }

std::string training_log_csv(const std::vector<double>& loss) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(loss.size());
  for (size_t j = 0; j < loss.size(); ++j)
    rows.push_back({std::to_string(j), format_double(loss[j])});
  return render_csv({"round", "train_anchor_loss"}, rows);
}

std::string loeo_table_csv(const LoeoResult& res) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : res.table) {
    rows.push_back({format_double(row.gamma), row.holdout_env, row.metric,
                    format_double(row.value), std::to_string(row.n)});
  }
  return render_csv({"gamma", "holdout_env", "metric", "value", "n"}, rows);
}

std::string kfold_table_csv(const KfoldSelection& sel, const std::string& param_name,
                            const std::string& metric) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : sel.table) {
    rows.push_back({format_double(row.candidate.gamma), param_name,
                    format_double(row.candidate.param), std::to_string(row.fold), metric,
                    format_double(row.value), std::to_string(row.n)});
  }
  return render_csv({"gamma", "param", "param_value", "fold", "metric", "value", "n"}, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anchor-regularized linear models and boosted trees with regime analysis"};
  app.require_subcommand(1);

  // ---- simulate ----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Generate data from a structural causal model");
  CommonOpts sim_common;
  sim_common.add_options(sim);
  std::string sim_scm_path, sim_task = "regression", sim_out;
  int64_t sim_n = 1000;
  double sim_shift = 1.0;
  uint64_t sim_seed = 0;
  sim->add_option("--scm", sim_scm_path, "SCM JSON file (default: built-in canonical SCM)");
  sim->add_option("--task", sim_task, "regression | classification (canonical SCM only)");
  sim->add_option("--n", sim_n, "Rows to generate");
  sim->add_option("--shift-scale", sim_shift, "Environment shift multiplier");
  sim->add_option("--seed", sim_seed, "Seed override (0 = the SCM's own seed)");
  sim->add_option("--out", sim_out, "Output CSV path")->required();

  // ---- train -------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Fit a linear or boosted anchor model");
  CommonOpts train_common;
  train_common.add_options(train);
  cli::DataOpts train_data;
  train_data.add_options(train);
  std::string train_kind = "linear", train_out, train_log;
  double train_gamma = 1.0, train_lambda = 0.0, train_eta = 1.0;
  BoostFlags train_boost;
  train->add_option("--model", train_kind, "linear | boosted");
  train->add_option("--gamma", train_gamma, "Invariance regularization (>= 1)");
  train->add_option("--lambda", train_lambda, "Elastic-net penalty");
  train->add_option("--eta", train_eta, "Elastic-net l1 mix in [0,1]");
  train_boost.add_options(train);
  train->add_option("--out", train_out, "Output model JSON path")->required();
  train->add_option("--log", train_log, "Training-log CSV (per-round loss, boosted models)");

  // ---- predict -----------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "Predict scores with a trained model");
  CommonOpts predict_common;
  predict_common.add_options(predict);
  cli::DataOpts predict_data;
  predict_data.add_options(predict);
  std::string predict_model, predict_out;
  predict->add_option("--model", predict_model, "Model JSON file")->required();
  predict->add_option("--out", predict_out, "Output CSV path")->required();

  // ---- evaluate ----------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model on a dataset");
  CommonOpts eval_common;
  eval_common.add_options(evaluate);
  cli::DataOpts eval_data;
  eval_data.add_options(evaluate);
  std::string eval_model, eval_metric = "auto", eval_out;
  evaluate->add_option("--model", eval_model, "Model JSON file")->required();
  evaluate->add_option("--metric", eval_metric, "mse | nll | auprc | auto");
  evaluate->add_option("--out", eval_out, "Optional CSV output");

  // ---- cv ----------------------------------------------------------------
  auto* cv = app.add_subcommand("cv", "Leave-one-environment-out selection of gamma");
  CommonOpts cv_common;
  cv_common.add_options(cv);
  cli::DataOpts cv_data;
  cv_data.add_options(cv);
  std::string cv_kind = "linear", cv_out;
  std::vector<double> cv_gamma_grid = {1, 2, 4, 8, 16};
  double cv_lambda = 0.0, cv_eta = 1.0;
  BoostFlags cv_boost;
  cv->add_option("--model", cv_kind, "linear | boosted");
  cv->add_option("--gamma-grid", cv_gamma_grid, "Gamma grid");
  cv->add_option("--lambda", cv_lambda, "Elastic-net penalty (linear)");
  cv->add_option("--eta", cv_eta, "Elastic-net l1 mix (linear)");
  cv_boost.add_options(cv);
  cv->add_option("--out", cv_out, "Score table CSV (gamma, holdout_env, metric, value, n)");

  // ---- refit -------------------------------------------------------------
  auto* refit = app.add_subcommand("refit", "Refit source models on target data");
  CommonOpts refit_common;
  refit_common.add_options(refit);
  cli::DataOpts refit_data;
  refit_data.add_options(refit);
  std::vector<std::string> refit_models;
  std::string refit_out, refit_cv_log;
  double refit_dr = -1.0, refit_alpha = -1.0, refit_lambda = 0.0, refit_eta = 1.0;
  std::vector<double> refit_dr_grid, refit_alpha_grid;
  int refit_folds = 5;
  refit->add_option("--model", refit_models, "Source model JSON file(s), one per gamma")
      ->required();
  refit->add_option("--dr", refit_dr, "Forced decay rate (boosted)");
  refit->add_option("--alpha", refit_alpha, "Forced prior width (linear)");
  refit->add_option("--dr-grid", refit_dr_grid, "Decay-rate grid (default 0,0.2,...,1)");
  refit->add_option("--alpha-grid", refit_alpha_grid, "Prior-width grid (default 10...1e-3)");
  refit->add_option("--lambda", refit_lambda, "Elastic-net penalty for linear refits");
  refit->add_option("--eta", refit_eta, "Elastic-net l1 mix for linear refits");
  refit->add_option("--folds", refit_folds, "CV folds");
  refit->add_option("--out", refit_out, "Output model JSON path")->required();
  refit->add_option("--cv-log", refit_cv_log, "CV score table CSV");

  // ---- regimes -----------------------------------------------------------
  auto* regimes = app.add_subcommand("regimes", "Three-regime analysis of external data value");
  CommonOpts regimes_common;
  regimes_common.add_options(regimes);
  std::string regimes_curves, regimes_orientation = "auto";
  std::string regimes_out_curves, regimes_out_transitions;
  cli::DataOpts regimes_source, regimes_target, regimes_test;
  std::string regimes_kind = "linear";
  std::vector<double> regimes_gamma_grid = {1, 2, 4, 8, 16};
  std::vector<double> regimes_param_grid;
  double regimes_lambda = 0.0, regimes_eta = 1.0;
  std::vector<int64_t> regimes_sizes;
  int regimes_seeds = 20, regimes_folds = 5;
  BoostFlags regimes_boost;
  regimes->add_option("--curves", regimes_curves,
                      "Existing curves CSV (strategy,seed,n,metric,value); skips the pipeline");
  regimes->add_option("--orientation", regimes_orientation, "auto | lower | higher");
  regimes_source.add_options(regimes, "source-");
  regimes_target.add_options(regimes, "target-");
  regimes_test.add_options(regimes, "test-");
  regimes->add_option("--model", regimes_kind, "linear | boosted");
  regimes->add_option("--gamma-grid", regimes_gamma_grid, "Source-model gamma grid");
  regimes->add_option("--param-grid", regimes_param_grid,
                      "Refit grid: decay rates (boosted) or prior widths (linear)");
  regimes->add_option("--lambda", regimes_lambda, "Elastic-net penalty (linear)");
  regimes->add_option("--eta", regimes_eta, "Elastic-net l1 mix (linear)");
  regimes->add_option("--sizes", regimes_sizes, "Subsample sizes (default 25,35,50,...)");
  regimes->add_option("--seeds", regimes_seeds, "Number of subsampling seeds");
  regimes->add_option("--folds", regimes_folds, "CV folds per subsample");
  regimes_boost.add_options(regimes);
  regimes->add_option("--out-curves", regimes_out_curves, "Curves CSV output");
  regimes->add_option("--out-transitions", regimes_out_transitions, "Transitions JSON output");

  // Required options are enforced after merging --config, not by CLI11.
  for (CLI::App* cmd : {sim, train, predict, evaluate, cv, refit, regimes}) {
    for (CLI::Option* opt : cmd->get_options()) {
      if (opt->get_required()) opt->required(false);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error code=config message=\"" << e.what() << "\"\n";
    return 2;
  }

  auto require = [](const std::string& value, const std::string& flag) {
    if (value.empty()) throw config_error("missing required option --" + flag);
  };

  // ---- dispatch ----------------------------------------------------------
  if (sim->parsed()) {
    return cli::run_guarded([&] {
      const cli::JsonConfig cfg = [&] {
        sim_common.apply_threads();
        return sim_common.load_config();
      }();
      cfg.check_known({"scm", "task", "n", "shift_scale", "seed", "out", "threads"});
      cfg.apply(sim, "scm", "scm", &sim_scm_path);
      cfg.apply(sim, "task", "task", &sim_task);
      cfg.apply(sim, "n", "n", &sim_n);
      cfg.apply(sim, "shift-scale", "shift_scale", &sim_shift);
      cfg.apply(sim, "seed", "seed", &sim_seed);
      cfg.apply(sim, "out", "out", &sim_out);
      require(sim_out, "out");

      AnchorSCM scm;
      if (!sim_scm_path.empty()) {
        scm = load_scm(sim_scm_path);
      } else if (sim_task == "classification") {
        scm = canonical_scm(Task::classification);
      } else if (sim_task == "regression") {
        scm = canonical_scm(Task::regression);
      } else {
        throw config_error("unknown task: '" + sim_task + "'");
      }
      const Dataset d = sim_seed != 0 ? generate_seeded(scm, sim_n, sim_shift, sim_seed)
                                      : generate(scm, sim_n, sim_shift);
      write_dataset_csv(d, sim_out);
    });
  }

  if (train->parsed()) {
    return cli::run_guarded([&] {
      const cli::JsonConfig cfg = train_common.load_config();
      cfg.check_known({"data", "schema", "outcome_col", "anchor_cols", "group_col", "task",
                       "model", "gamma", "lambda", "eta", "trees", "learning_rate", "max_depth",
                       "min_gain", "min_samples_leaf", "bins", "out", "log", "threads"});
      cfg.apply(train, "threads", "threads", &train_common.threads);
      train_common.apply_threads();
      merge_data_opts(&train_data, cfg, train);
      cfg.apply(train, "model", "model", &train_kind);
      cfg.apply(train, "gamma", "gamma", &train_gamma);
      cfg.apply(train, "lambda", "lambda", &train_lambda);
      cfg.apply(train, "eta", "eta", &train_eta);
      train_boost.merge(cfg, train);
      cfg.apply(train, "out", "out", &train_out);
      cfg.apply(train, "log", "log", &train_log);
      require(train_data.data_path, "data");
      require(train_out, "out");

      const Dataset d = train_data.load();
      if (train_kind == "linear") {
        const LinearAnchorModel m =
            d.task == Task::regression
                ? fit_linear_anchor(d, train_gamma, {train_lambda, train_eta})
                : fit_linear_anchor_classification(d, train_gamma, {train_lambda, train_eta});
        save_linear_model(m, train_out);
      } else if (train_kind == "boosted") {
        const BoostedAnchorModel m =
            fit_boosted(d, train_boost.to_config(train_gamma, link_for(d.task)));
        save_boosted_model(m, train_out);
        if (!train_log.empty()) atomic_write_file(train_log, training_log_csv(m.train_loss));
      } else {
        throw config_error("unknown model kind: '" + train_kind + "'");
      }
    });
  }

  if (predict->parsed()) {
    return cli::run_guarded([&] {
      const cli::JsonConfig cfg = predict_common.load_config();
      cfg.check_known({"data", "schema", "outcome_col", "anchor_cols", "group_col", "task",
                       "model", "out", "threads"});
      cfg.apply(predict, "threads", "threads", &predict_common.threads);
      predict_common.apply_threads();
      merge_data_opts(&predict_data, cfg, predict);
      cfg.apply(predict, "model", "model", &predict_model);
      cfg.apply(predict, "out", "out", &predict_out);
      require(predict_model, "model");
      require(predict_data.data_path, "data");
      require(predict_out, "out");

      const cli::AnyModel m = cli::AnyModel::load(predict_model);
      if (m.task() == Task::classification) predict_data.task = "classification";
      const Dataset d = predict_data.load();
      const Eigen::VectorXd scores = m.predict(d);
      std::vector<std::vector<std::string>> rows;
      if (m.task() == Task::classification) {
        for (int64_t i = 0; i < scores.size(); ++i)
          rows.push_back({format_double(scores[i]), format_double(probit_probability(scores[i]))});
        atomic_write_file(predict_out, render_csv({"score", "probability"}, rows));
      } else {
        for (int64_t i = 0; i < scores.size(); ++i) rows.push_back({format_double(scores[i])});
        atomic_write_file(predict_out, render_csv({"score"}, rows));
      }
    });
  }

  if (evaluate->parsed()) {
    return cli::run_guarded([&] {
      const cli::JsonConfig cfg = eval_common.load_config();
      cfg.check_known({"data", "schema", "outcome_col", "anchor_cols", "group_col", "task",
                       "model", "metric", "out", "threads"});
      cfg.apply(evaluate, "threads", "threads", &eval_common.threads);
      eval_common.apply_threads();
      merge_data_opts(&eval_data, cfg, evaluate);
      cfg.apply(evaluate, "model", "model", &eval_model);
      cfg.apply(evaluate, "metric", "metric", &eval_metric);
      cfg.apply(evaluate, "out", "out", &eval_out);
      require(eval_model, "model");
      require(eval_data.data_path, "data");

      const cli::AnyModel m = cli::AnyModel::load(eval_model);
      if (m.task() == Task::classification) eval_data.task = "classification";
      const Dataset d = eval_data.load();
      const Eigen::VectorXd scores = m.predict(d);
      std::string metric = eval_metric;
      if (metric == "auto") metric = d.task == Task::regression ? "mse" : "nll";
      double value;
      if (metric == "mse") {
        value = mse(scores, d.outcome);
      } else if (metric == "nll") {
        value = probit_nll(scores, d.outcome);
      } else if (metric == "auprc") {
        if (d.task != Task::classification) throw config_error("auprc needs classification data");
        value = auprc(scores, d.outcome);
      } else {
        throw config_error("unknown metric: '" + metric + "'");
      }
      std::cout << "metric=" << metric << " value=" << format_double(value)
                << " n=" << d.n_rows() << "\n";
      if (!eval_out.empty()) {
        atomic_write_file(eval_out,
                          render_csv({"metric", "value", "n"},
                                     {{metric, format_double(value), std::to_string(d.n_rows())}}));
      }
    });
  }

  if (cv->parsed()) {
    return cli::run_guarded([&] {
      const cli::JsonConfig cfg = cv_common.load_config();
      cfg.check_known({"data", "schema", "outcome_col", "anchor_cols", "group_col", "task",
                       "model", "gamma_grid", "lambda", "eta", "trees", "learning_rate",
                       "max_depth", "min_gain", "min_samples_leaf", "bins", "out", "threads"});
      cfg.apply(cv, "threads", "threads", &cv_common.threads);
      cv_common.apply_threads();
      merge_data_opts(&cv_data, cfg, cv);
      cfg.apply(cv, "model", "model", &cv_kind);
      cfg.apply(cv, "gamma-grid", "gamma_grid", &cv_gamma_grid);
      cfg.apply(cv, "lambda", "lambda", &cv_lambda);
      cfg.apply(cv, "eta", "eta", &cv_eta);
      cv_boost.merge(cfg, cv);
      cfg.apply(cv, "out", "out", &cv_out);
      require(cv_data.data_path, "data");

      const Dataset d = cv_data.load();
      const GammaTrainer trainer = [&](const Dataset& tr, double gamma, const Dataset& te) {
        if (cv_kind == "linear") {
          return d.task == Task::regression
                     ? fit_linear_anchor(tr, gamma, {cv_lambda, cv_eta}).predict(te.features)
                     : fit_linear_anchor_classification(tr, gamma, {cv_lambda, cv_eta})
                           .predict(te.features);
        }
        if (cv_kind != "boosted") throw config_error("unknown model kind: '" + cv_kind + "'");
        return fit_boosted(tr, cv_boost.to_config(gamma, link_for(d.task)))
            .predict(te.features);
      };
      const LoeoResult res = loeo_select_gamma(d, cv_gamma_grid, trainer);
      if (!cv_out.empty()) atomic_write_file(cv_out, loeo_table_csv(res));
      std::cout << format_double(res.selected_gamma) << "\n";
    });
  }

  if (refit->parsed()) {
    return cli::run_guarded([&] {
      const cli::JsonConfig cfg = refit_common.load_config();
      cfg.check_known({"data", "schema", "outcome_col", "anchor_cols", "group_col", "task",
                       "model", "dr", "alpha", "dr_grid", "alpha_grid", "lambda", "eta", "folds",
                       "out", "cv_log", "threads"});
      cfg.apply(refit, "threads", "threads", &refit_common.threads);
      refit_common.apply_threads();
      merge_data_opts(&refit_data, cfg, refit);
      cfg.apply(refit, "model", "model", &refit_models);
      cfg.apply(refit, "dr", "dr", &refit_dr);
      cfg.apply(refit, "alpha", "alpha", &refit_alpha);
      cfg.apply(refit, "dr-grid", "dr_grid", &refit_dr_grid);
      cfg.apply(refit, "alpha-grid", "alpha_grid", &refit_alpha_grid);
      cfg.apply(refit, "lambda", "lambda", &refit_lambda);
      cfg.apply(refit, "eta", "eta", &refit_eta);
      cfg.apply(refit, "folds", "folds", &refit_folds);
      cfg.apply(refit, "out", "out", &refit_out);
      cfg.apply(refit, "cv-log", "cv_log", &refit_cv_log);
      if (refit_models.empty()) throw config_error("missing required option --model");
      require(refit_out, "out");
      require(refit_data.data_path, "data");

      std::vector<cli::AnyModel> models;
      for (const auto& path : refit_models) models.push_back(cli::AnyModel::load(path));
      const bool boosted = models.front().boosted.has_value();
      for (const auto& m : models) {
        if (m.boosted.has_value() != boosted)
          throw config_error("source models must all share one kind");
      }
      for (size_t i = 0; i < models.size(); ++i)
        for (size_t j = i + 1; j < models.size(); ++j)
          if (models[i].gamma() == models[j].gamma())
            throw config_error("source models must have distinct gamma values");

      if (models.front().task() == Task::classification) refit_data.task = "classification";
      const Dataset target = refit_data.load();
      const std::string param_name = boosted ? "dr" : "alpha";
      const double forced = boosted ? refit_dr : refit_alpha;

      std::vector<double> param_grid = boosted ? refit_dr_grid : refit_alpha_grid;
      if (forced >= 0.0) param_grid = {forced};
      if (param_grid.empty())
        param_grid = boosted ? default_dr_grid() : default_alpha_grid();

      std::vector<RefitCandidate> candidates;
      for (const auto& m : models)
        for (double p : param_grid) candidates.push_back({m.gamma(), p});

      auto model_for_gamma = [&](double gamma) -> const cli::AnyModel& {
        for (const auto& m : models)
          if (m.gamma() == gamma) return m;
        throw config_error("no source model with gamma " + format_double(gamma));
      };
      auto refit_with = [&](const RefitCandidate& c, const Dataset& data) {
        const cli::AnyModel& src = model_for_gamma(c.gamma);
        cli::AnyModel out;
        if (boosted) {
          out.boosted = refit_leaves(*src.boosted, data, c.param);
        } else {
          out.linear =
              refit_empirical_bayes(*src.linear, data, c.param, {refit_lambda, refit_eta});
        }
        return out;
      };

      RefitCandidate chosen = candidates.front();
      if (candidates.size() > 1) {
        const RefitEvaluator eval = [&](const RefitCandidate& c, const Dataset& fold_train,
                                        const Dataset& fold_test) {
          return refit_with(c, fold_train).predict_scores(fold_test.features);
        };
        const KfoldSelection sel =
            kfold_refit_select(candidates, target, refit_folds, eval);
        chosen = sel.selected;
        if (!refit_cv_log.empty()) {
          const std::string metric = target.task == Task::regression ? "mse" : "nll";
          atomic_write_file(refit_cv_log, kfold_table_csv(sel, param_name, metric));
        }
      }
      const cli::AnyModel final_model = refit_with(chosen, target);
      if (boosted) {
        save_boosted_model(*final_model.boosted, refit_out);
      } else {
        save_linear_model(*final_model.linear, refit_out);
      }
      std::cout << "gamma=" << format_double(chosen.gamma) << " " << param_name << "="
                << format_double(chosen.param) << "\n";
    });
  }

  if (regimes->parsed()) {
    return cli::run_guarded([&] {
      const cli::JsonConfig cfg = regimes_common.load_config();
      cfg.check_known({"curves", "orientation", "source_data", "target_data", "test_data",
                       "model", "gamma_grid", "param_grid", "lambda", "eta", "sizes", "seeds",
                       "folds", "trees", "learning_rate", "max_depth", "min_gain",
                       "min_samples_leaf", "bins", "out_curves", "out_transitions", "threads",
                       "outcome_col", "anchor_cols", "group_col", "task"});
      cfg.apply(regimes, "threads", "threads", &regimes_common.threads);
      regimes_common.apply_threads();
      cfg.apply(regimes, "curves", "curves", &regimes_curves);
      cfg.apply(regimes, "orientation", "orientation", &regimes_orientation);
      cfg.apply(regimes, "source-data", "source_data", &regimes_source.data_path);
      cfg.apply(regimes, "target-data", "target_data", &regimes_target.data_path);
      cfg.apply(regimes, "test-data", "test_data", &regimes_test.data_path);
      regimes_target.outcome_from_config |=
          cfg.apply(regimes, "target-outcome-col", "outcome_col", &regimes_target.outcome_col);
      regimes_target.anchor_from_config |=
          cfg.apply(regimes, "target-anchor-cols", "anchor_cols", &regimes_target.anchor_cols);
      regimes_target.group_from_config |=
          cfg.apply(regimes, "target-group-col", "group_col", &regimes_target.group_col);
      regimes_target.task_from_config |=
          cfg.apply(regimes, "target-task", "task", &regimes_target.task);
      cfg.apply(regimes, "model", "model", &regimes_kind);
      cfg.apply(regimes, "gamma-grid", "gamma_grid", &regimes_gamma_grid);
      cfg.apply(regimes, "param-grid", "param_grid", &regimes_param_grid);
      cfg.apply(regimes, "lambda", "lambda", &regimes_lambda);
      cfg.apply(regimes, "eta", "eta", &regimes_eta);
      cfg.apply(regimes, "sizes", "sizes", &regimes_sizes);
      cfg.apply(regimes, "seeds", "seeds", &regimes_seeds);
      cfg.apply(regimes, "folds", "folds", &regimes_folds);
      regimes_boost.merge(cfg, regimes);
      cfg.apply(regimes, "out-curves", "out_curves", &regimes_out_curves);
      cfg.apply(regimes, "out-transitions", "out_transitions", &regimes_out_transitions);

      cli::RegimeRunOpts opts;
      opts.orientation = regimes_orientation;
      opts.out_curves = regimes_out_curves;
      opts.out_transitions = regimes_out_transitions;
      if (!regimes_curves.empty()) {
        opts.curves_path = regimes_curves;
      } else {
        require(regimes_source.data_path, "source-data");
        require(regimes_target.data_path, "target-data");
        require(regimes_test.data_path, "test-data");
        opts.full_mode = true;
        // The three datasets share the column conventions of --target-*.
        const bool cols_given = regimes_target.outcome_from_config ||
                                regimes_target.outcome_opt->count() > 0 ||
                                regimes_target.anchor_from_config ||
                                regimes_target.anchor_opt->count() > 0;
        for (cli::DataOpts* other : {&regimes_source, &regimes_test}) {
          other->outcome_col = regimes_target.outcome_col;
          other->anchor_cols = regimes_target.anchor_cols;
          other->group_col = regimes_target.group_col;
          other->task = regimes_target.task;
          other->outcome_from_config = cols_given;
          other->anchor_from_config = cols_given;
          other->task_from_config = true;  // tasks must match across the three
        }
        opts.source = regimes_source.load();
        opts.target_pool = regimes_target.load();
        opts.target_test = regimes_test.load();
        opts.model_kind = regimes_kind;
        opts.gamma_grid = regimes_gamma_grid;
        opts.param_grid = regimes_param_grid;
        if (opts.param_grid.empty())
          opts.param_grid = regimes_kind == "boosted" ? default_dr_grid() : default_alpha_grid();
        opts.lambda = regimes_lambda;
        opts.eta = regimes_eta;
        opts.trees = regimes_boost.trees;
        opts.max_depth = regimes_boost.max_depth;
        opts.learning_rate = regimes_boost.learning_rate;
        opts.min_gain = regimes_boost.min_gain;
        opts.min_samples_leaf = regimes_boost.min_samples_leaf;
        opts.bins = regimes_boost.bins;
        opts.sizes = regimes_sizes;
        if (opts.sizes.empty()) opts.sizes = default_size_grid(opts.target_pool.n_rows());
        opts.n_seeds = regimes_seeds;
        opts.folds = regimes_folds;
      }
      cli::run_regimes(opts);
    });
  }

  return 0;
}
