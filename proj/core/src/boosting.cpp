#include "anchor/boosting.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "anchor/csv.hpp"
#include "anchor/gaussian.hpp"
#include "anchor/parallel.hpp"

namespace anchor {

void validate_boost_config(const BoostConfig& config) {
  if (config.num_trees < 1) throw config_error("num_trees must be >= 1");
  if (!(config.learning_rate > 0.0)) throw config_error("learning_rate must be > 0");
  if (config.max_depth < 1) throw config_error("max_depth must be >= 1");
  if (config.min_gain_to_split < 0.0) throw config_error("min_gain_to_split must be >= 0");
  if (config.min_samples_leaf < 1) throw config_error("min_samples_leaf must be >= 1");
  if (config.histogram_bins < 2 || config.histogram_bins > 255)
    throw config_error("histogram_bins must lie in [2, 255]");
  if (config.gamma < 1.0) throw config_error("gamma must be >= 1");
  if (config.link == Link::logistic_diagnostic)
    throw config_error("logistic link is diagnostic-only, not trainable");
}

double initial_score(const Eigen::VectorXd& y, Link link) {
  if (y.size() == 0) throw data_error("initial_score: empty outcome");
  if (link == Link::identity) return y.mean();
  if (link == Link::probit) {
    const double prevalence = ((y.array() + 1.0) / 2.0).mean();
    if (prevalence <= 0.0 || prevalence >= 1.0)
      throw data_error("initial_score: class prevalence is 0 or 1");
    return norm_quantile(prevalence);
  }
  throw config_error("initial_score: unsupported link");
}

int32_t Tree::route(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int32_t id = 0;
  while (!nodes[id].is_leaf())
    id = row[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  return id;
}

double Tree::response(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  return nodes[route(row)].value;
}

FeatureBins::FeatureBins(const Eigen::MatrixXd& features, int max_bins) {
  n_ = features.rows();
  if (n_ == 0) throw data_error("binning: empty feature matrix");
  const int p = static_cast<int>(features.cols());
  edges_.resize(p);
  codes_.resize(p);
  global_counts_.resize(p);
  parallel_jobs(p, [&](int64_t f) {
    std::vector<double> sorted(features.col(f).data(), features.col(f).data() + n_);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double>& edges = edges_[f];
    int64_t distinct = 1;
    for (int64_t i = 1; i < n_; ++i)
      if (sorted[i] != sorted[i - 1]) ++distinct;
    if (distinct <= max_bins) {
      edges.reserve(distinct);
      edges.push_back(sorted[0]);
      for (int64_t i = 1; i < n_; ++i)
        if (sorted[i] != sorted[i - 1]) edges.push_back(sorted[i]);
    } else {
      edges.reserve(max_bins);
      for (int b = 1; b <= max_bins; ++b) {
        const int64_t pos = n_ * b / max_bins - 1;
        const double v = sorted[pos];
        if (edges.empty() || v > edges.back()) edges.push_back(v);
      }
    }
    codes_[f].resize(n_);
    global_counts_[f].assign(edges.size(), 0);
    for (int64_t i = 0; i < n_; ++i) {
      const auto it = std::lower_bound(edges.begin(), edges.end(), features(i, f));
      const auto code = static_cast<uint8_t>(it - edges.begin());
      codes_[f][i] = code;
      ++global_counts_[f][code];
    }
  });
}

namespace {

struct Histogram {
  std::vector<double> sums;
  std::vector<int32_t> counts;
};

struct SplitCandidate {
  double gain = -1.0;
  int feature = -1;
  int cut_bin = -1;  // codes <= cut_bin route left
  double left_sum = 0.0;
  int64_t left_count = 0;
};

struct NodeWork {
  int32_t node_id = 0;
  int64_t begin = 0;
  int64_t end = 0;
  int depth = 0;
  double sum_z = 0.0;
  Histogram hist;
  bool has_hist = false;
};

class TreeGrower {
 public:
  TreeGrower(const FeatureBins& bins, const Eigen::VectorXd& z, const BoostConfig& config)
      : bins_(bins), z_(z), config_(config), n_(bins.rows()), p_(bins.n_features()) {
    offsets_.resize(p_ + 1);
    offsets_[0] = 0;
    for (int f = 0; f < p_; ++f) offsets_[f + 1] = offsets_[f] + bins_.n_bins(f);
    row_index_.resize(n_);
    std::iota(row_index_.begin(), row_index_.end(), 0);
    scratch_.resize(n_);
  }

  std::pair<Tree, LeafAssignment> grow() {
    Tree tree;
    LeafAssignment assign;
    assign.leaf_index.assign(n_, -1);

    tree.nodes.emplace_back();
    NodeWork root;
    root.node_id = 0;
    root.begin = 0;
    root.end = n_;
    root.depth = 0;
    root.sum_z = z_.sum();
    if (can_split(root)) build_root_histogram(root);

    std::vector<NodeWork> level;
    level.push_back(std::move(root));
    while (!level.empty()) {
      std::vector<NodeWork> next;
      for (NodeWork& work : level) {
        SplitCandidate best;
        if (work.has_hist) best = find_best_split(work);
        if (best.feature < 0) {
          finalize_leaf(tree, assign, work);
          continue;
        }
        split_node(tree, work, best, &next);
      }
      level = std::move(next);
    }
    assign.leaf_count = tree.n_leaves;
    return {std::move(tree), std::move(assign)};
  }

 private:
  bool can_split(const NodeWork& w) const {
    return w.depth < config_.max_depth &&
           (w.end - w.begin) >= 2 * static_cast<int64_t>(config_.min_samples_leaf);
  }

  void alloc_hist(Histogram* h) const {
    h->sums.assign(offsets_[p_], 0.0);
    h->counts.assign(offsets_[p_], 0);
  }

  void build_root_histogram(NodeWork& w) {
    alloc_hist(&w.hist);
    double* sums = w.hist.sums.data();
    const double* z = z_.data();
    parallel_jobs(p_, [&](int64_t f) {
      const uint8_t* codes = bins_.codes(static_cast<int>(f));
      double* s = sums + offsets_[f];
      for (int64_t i = 0; i < n_; ++i) s[codes[i]] += z[i];
      const auto& gc = bins_.global_counts(static_cast<int>(f));
      std::copy(gc.begin(), gc.end(), w.hist.counts.begin() + offsets_[f]);
    });
    w.has_hist = true;
  }

  void build_histogram(NodeWork& w) {
    alloc_hist(&w.hist);
    const int32_t* rows = row_index_.data() + w.begin;
    const int64_t m = w.end - w.begin;
    const double* z = z_.data();
    double* sums = w.hist.sums.data();
    int32_t* counts = w.hist.counts.data();
    parallel_jobs(p_, [&](int64_t f) {
      const uint8_t* codes = bins_.codes(static_cast<int>(f));
      double* s = sums + offsets_[f];
      int32_t* c = counts + offsets_[f];
      for (int64_t i = 0; i < m; ++i) {
        const int32_t r = rows[i];
        const uint8_t b = codes[r];
        s[b] += z[r];
        ++c[b];
      }
    });
    w.has_hist = true;
  }

  SplitCandidate find_best_split(const NodeWork& w) const {
    SplitCandidate best;
    const int64_t n_node = w.end - w.begin;
    const double total = w.sum_z;
    const double parent_score = total * total / static_cast<double>(n_node);
    const int64_t min_leaf = config_.min_samples_leaf;
    for (int f = 0; f < p_; ++f) {
      const double* s = w.hist.sums.data() + offsets_[f];
      const int32_t* c = w.hist.counts.data() + offsets_[f];
      const int nb = bins_.n_bins(f);
      double left_sum = 0.0;
      int64_t left_count = 0;
      for (int b = 0; b + 1 < nb; ++b) {
        left_sum += s[b];
        left_count += c[b];
        const int64_t right_count = n_node - left_count;
        if (left_count < min_leaf) continue;
        if (right_count < min_leaf) break;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                            right_sum * right_sum / static_cast<double>(right_count) -
                            parent_score;
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = f;
          best.cut_bin = b;
          best.left_sum = left_sum;
          best.left_count = left_count;
        }
      }
    }
    if (best.feature >= 0 && best.gain < config_.min_gain_to_split) best.feature = -1;
    return best;
  }

  void finalize_leaf(Tree& tree, LeafAssignment& assign, NodeWork& w) {
    TreeNode& node = tree.nodes[w.node_id];
    node.feature = -1;
    node.leaf_index = tree.n_leaves++;
    const int64_t count = w.end - w.begin;
    node.value = w.sum_z / static_cast<double>(count);
    for (int64_t i = w.begin; i < w.end; ++i) assign.leaf_index[row_index_[i]] = node.leaf_index;
  }

  void split_node(Tree& tree, NodeWork& w, const SplitCandidate& best,
                  std::vector<NodeWork>* next) {
    const int32_t left_id = static_cast<int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int32_t right_id = static_cast<int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& node = tree.nodes[w.node_id];
    node.feature = best.feature;
    node.threshold = bins_.upper_edge(best.feature, best.cut_bin);
    node.left = left_id;
    node.right = right_id;

    // Stable partition of the node's rows by bin code.
    const uint8_t* codes = bins_.codes(best.feature);
    const int64_t m = w.end - w.begin;
    int32_t* rows = row_index_.data() + w.begin;
    int64_t nl = 0;
    int64_t nr = 0;
    int32_t* left_buf = scratch_.data();
    std::vector<int32_t> right_buf(m - best.left_count);
    for (int64_t i = 0; i < m; ++i) {
      const int32_t r = rows[i];
      if (codes[r] <= best.cut_bin) {
        left_buf[nl++] = r;
      } else {
        right_buf[nr++] = r;
      }
    }
    std::copy(left_buf, left_buf + nl, rows);
    std::copy(right_buf.begin(), right_buf.end(), rows + nl);

    NodeWork left;
    left.node_id = left_id;
    left.begin = w.begin;
    left.end = w.begin + nl;
    left.depth = w.depth + 1;
    left.sum_z = best.left_sum;
    NodeWork right;
    right.node_id = right_id;
    right.begin = w.begin + nl;
    right.end = w.end;
    right.depth = w.depth + 1;
    right.sum_z = w.sum_z - best.left_sum;

    const bool left_wants = can_split(left);
    const bool right_wants = can_split(right);
    if (left_wants || right_wants) {
      NodeWork& small = nl <= nr ? left : right;
      NodeWork& big = nl <= nr ? right : left;
      build_histogram(small);
      const bool big_wants = (&big == &left) ? left_wants : right_wants;
      if (big_wants) {
        // Sibling subtraction: big = parent - small.
        big.hist = std::move(w.hist);
        for (size_t i = 0; i < big.hist.sums.size(); ++i) {
          big.hist.sums[i] -= small.hist.sums[i];
          big.hist.counts[i] -= small.hist.counts[i];
        }
        big.has_hist = true;
      }
      const bool small_wants = (&small == &left) ? left_wants : right_wants;
      if (!small_wants) {
        small.hist = Histogram{};
        small.has_hist = false;
      }
    }
    next->push_back(std::move(left));
    next->push_back(std::move(right));
  }

  const FeatureBins& bins_;
  const Eigen::VectorXd& z_;
  const BoostConfig& config_;
  const int64_t n_;
  const int p_;
  std::vector<int64_t> offsets_;
  std::vector<int32_t> row_index_;
  std::vector<int32_t> scratch_;
};

}  // namespace

std::pair<Tree, LeafAssignment> grow_tree_binned(const FeatureBins& bins,
                                                 const Eigen::VectorXd& negative_gradient,
                                                 const BoostConfig& config) {
  validate_boost_config(config);
  if (negative_gradient.size() != bins.rows())
    throw data_error("negative gradient length does not match rows");
  if (!negative_gradient.allFinite()) throw data_error("negative gradient is not finite");
  TreeGrower grower(bins, negative_gradient, config);
  return grower.grow();
}

std::pair<Tree, LeafAssignment> grow_tree(const Eigen::MatrixXd& features,
                                          const Eigen::VectorXd& negative_gradient,
                                          const BoostConfig& config) {
  const FeatureBins bins(features, config.histogram_bins);
  return grow_tree_binned(bins, negative_gradient, config);
}

Eigen::VectorXd solve_leaf_values(const LeafAssignment& assignment, const LossEvaluation& ev) {
  const int k = assignment.leaf_count;
  const int64_t n = static_cast<int64_t>(assignment.leaf_index.size());
  if (k < 1) throw data_error("leaf solve: no leaves");
  if (ev.gradient.size() != n) throw data_error("leaf solve: row mismatch");

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(k);
  for (int64_t i = 0; i < n; ++i) {
    const int32_t l = assignment.leaf_index[i];
    rhs[l] -= ev.gradient[i];
    diag[l] += ev.hessian_diag[i];
  }
  Eigen::MatrixXd a = diag.asDiagonal();

  if (ev.gamma_minus_one != 0.0) {
    const ProjectionOperator& proj = *ev.projection;
    if (proj.is_group_mean()) {
      const auto& env = proj.env();
      const auto& counts = proj.env_counts();
      const int n_envs = proj.n_envs();
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_envs, k);
      for (int64_t i = 0; i < n; ++i) s(env[i], assignment.leaf_index[i]) += ev.anchor_weight[i];
      for (int e = 0; e < n_envs; ++e) {
        a.noalias() += (ev.gamma_minus_one / static_cast<double>(counts[e])) *
                       (s.row(e).transpose() * s.row(e));
      }
    } else {
      const Eigen::MatrixXd& q = proj.basis();
      const int r = static_cast<int>(q.cols());
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(r, k);
      for (int64_t i = 0; i < n; ++i) {
        const int32_t l = assignment.leaf_index[i];
        const double w = ev.anchor_weight[i];
        for (int c = 0; c < r; ++c) b(c, l) += q(i, c) * w;
      }
      a.noalias() += ev.gamma_minus_one * (b.transpose() * b);
    }
  }

  auto try_solve = [&](const Eigen::MatrixXd& mat, Eigen::VectorXd* out) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(mat);
    if (ldlt.info() != Eigen::Success) return false;
    *out = ldlt.solve(rhs);
    if (!out->allFinite()) return false;
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    return ((mat * *out - rhs).cwiseAbs().maxCoeff()) <= 1e-6 * scale;
  };

  Eigen::VectorXd beta;
  if (try_solve(a, &beta)) return beta;
  Eigen::MatrixXd jittered = a;
  jittered.diagonal().array() += 1e-8 * a.trace() / static_cast<double>(k);
  if (try_solve(jittered, &beta)) return beta;
  throw numeric_error("leaf-value system is singular even after ridge jitter");
}

Eigen::VectorXd first_order_leaf_values(const LeafAssignment& assignment,
                                        const LossEvaluation& ev) {
  const int k = assignment.leaf_count;
  const int64_t n = static_cast<int64_t>(assignment.leaf_index.size());
  Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd hess_sum = Eigen::VectorXd::Zero(k);
  // anchor_weight holds the gamma=1 Hessian diagonal for both links.
  for (int64_t i = 0; i < n; ++i) {
    const int32_t l = assignment.leaf_index[i];
    grad_sum[l] += ev.gradient[i];
    hess_sum[l] += ev.anchor_weight[i];
  }
  Eigen::VectorXd beta(k);
  for (int l = 0; l < k; ++l) beta[l] = hess_sum[l] > 0.0 ? -grad_sum[l] / hess_sum[l] : 0.0;
  return beta;
}

BoostedAnchorModel fit_boosted(const Dataset& d, const BoostConfig& config) {
  validate_boost_config(config);
  if (d.task == Task::classification && config.link != Link::probit)
    throw config_error("classification requires the probit link");
  if (d.task == Task::regression && config.link != Link::identity)
    throw config_error("regression requires the identity link");
  const int64_t n = d.n_rows();
  if (n == 0) throw data_error("empty dataset");

  const ProjectionOperator proj = ProjectionOperator::build(d.anchor);
  const AnchorLossSpec spec{config.gamma, config.link, &proj};
  const FeatureBins bins(d.features, config.histogram_bins);

  BoostedAnchorModel model;
  model.config = config;
  model.feature_names = d.column_names;
  model.f0 = initial_score(d.outcome, config.link);
  model.trees.reserve(config.num_trees);

  Eigen::VectorXd f = Eigen::VectorXd::Constant(n, model.f0);
  for (int round = 0; round < config.num_trees; ++round) {
    LossEvaluation ev = evaluate_loss(f, d.outcome, spec);
    if (!std::isfinite(ev.value)) throw boost_divergence_error(round, model.train_loss);
    model.train_loss.push_back(ev.value);

    auto [tree, assign] = grow_tree_binned(bins, -ev.gradient, config);
    const Eigen::VectorXd beta = config.leaf_update == LeafUpdateMode::second_order
                                     ? solve_leaf_values(assign, ev)
                                     : first_order_leaf_values(assign, ev);
    for (TreeNode& node : tree.nodes)
      if (node.is_leaf()) node.value = beta[node.leaf_index];
    for (int64_t i = 0; i < n; ++i)
      f[i] += config.learning_rate * beta[assign.leaf_index[i]];
    model.trees.push_back(std::move(tree));
  }
  const LossEvaluation final_ev = evaluate_loss(f, d.outcome, spec);
  if (!std::isfinite(final_ev.value))
    throw boost_divergence_error(config.num_trees, model.train_loss);
  model.train_loss.push_back(final_ev.value);
  return model;
}

namespace {

Eigen::VectorXd predict_prefix(const BoostedAnchorModel& m, const Eigen::MatrixXd& features,
                               size_t n_trees) {
  if (features.cols() != static_cast<int64_t>(m.feature_names.size()))
    throw data_error("feature count does not match model");
  Eigen::VectorXd f = Eigen::VectorXd::Constant(features.rows(), m.f0);
  const size_t count = std::min(n_trees, m.trees.size());
  parallel_for(0, features.rows(), 4096, [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) {
      double acc = 0.0;
      for (size_t t = 0; t < count; ++t) acc += m.trees[t].response(features.row(i));
      f[i] += m.config.learning_rate * acc;
    }
  });
  return f;
}

void check_model_features(const BoostedAnchorModel& m, const Dataset& d) {
  if (m.feature_names != d.column_names) {
    std::string msg = "feature columns do not match model; expected [";
    for (size_t i = 0; i < m.feature_names.size(); ++i)
      msg += (i ? ", " : "") + m.feature_names[i];
    msg += "], got [";
    for (size_t i = 0; i < d.column_names.size(); ++i) msg += (i ? ", " : "") + d.column_names[i];
    throw data_error(msg + "]");
  }
}

}  // namespace

Eigen::VectorXd predict_boosted_prefix(const BoostedAnchorModel& m,
                                       const Eigen::MatrixXd& features, int n_trees) {
  if (n_trees < 0) throw config_error("n_trees must be >= 0");
  return predict_prefix(m, features, static_cast<size_t>(n_trees));
}

Eigen::VectorXd BoostedAnchorModel::predict(const Eigen::MatrixXd& features) const {
  return predict_prefix(*this, features, trees.size());
}

Eigen::VectorXd BoostedAnchorModel::predict(const Dataset& d) const {
  check_model_features(*this, d);
  return predict(d.features);
}

Eigen::VectorXd BoostedAnchorModel::predict_proba(const Eigen::MatrixXd& features) const {
  if (config.link != Link::probit) throw config_error("predict_proba requires a probit model");
  Eigen::VectorXd f = predict(features);
  for (int64_t i = 0; i < f.size(); ++i) f[i] = probit_probability(f[i]);
  return f;
}

BoostedAnchorModel refit_leaves(const BoostedAnchorModel& source, const Dataset& target,
                                double dr) {
  if (dr < 0.0 || dr > 1.0) throw config_error("decay rate must lie in [0, 1]");
  check_model_features(source, target);
  if (source.task() != target.task) throw config_error("source and target tasks do not match");
  const int64_t n = target.n_rows();
  if (n == 0) throw data_error("empty target dataset");
  const Link link = source.config.link;

  BoostedAnchorModel out = source;
  out.train_loss.clear();
  Eigen::VectorXd f = Eigen::VectorXd::Constant(n, source.f0);
  std::vector<int32_t> leaf_of_row(n);

  for (Tree& tree : out.trees) {
    // Local leaf slots for this tree, in node order.
    std::vector<int32_t> leaf_nodes;
    for (size_t id = 0; id < tree.nodes.size(); ++id)
      if (tree.nodes[id].is_leaf()) leaf_nodes.push_back(static_cast<int32_t>(id));
    std::vector<int32_t> slot_of_node(tree.nodes.size(), -1);
    for (size_t s = 0; s < leaf_nodes.size(); ++s) slot_of_node[leaf_nodes[s]] = static_cast<int32_t>(s);

    const int k = static_cast<int>(leaf_nodes.size());
    Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd hess_sum = Eigen::VectorXd::Zero(k);
    std::vector<int64_t> counts(k, 0);
    for (int64_t i = 0; i < n; ++i) {
      const int32_t slot = slot_of_node[tree.route(target.features.row(i))];
      leaf_of_row[i] = slot;
      if (link == Link::identity) {
        grad_sum[slot] += f[i] - target.outcome[i];
        hess_sum[slot] += 1.0;
      } else {
        const ProbitResidual pr = probit_residual(f[i], target.outcome[i]);
        grad_sum[slot] += pr.r;
        hess_sum[slot] += pr.dr;
      }
      ++counts[slot];
    }

    for (int s = 0; s < k; ++s) {
      TreeNode& node = tree.nodes[leaf_nodes[s]];
      const double beta_old = node.value;
      double blended = beta_old;
      if (dr != 1.0) {
        // Empty leaves (and degenerate Hessians) keep the source value.
        const double beta_new =
            (counts[s] > 0 && hess_sum[s] > 0.0) ? -grad_sum[s] / hess_sum[s] : beta_old;
        blended = dr * beta_old + (1.0 - dr) * beta_new;
      }
      node.value = blended;
    }
    for (int64_t i = 0; i < n; ++i)
      f[i] += source.config.learning_rate * tree.nodes[leaf_nodes[leaf_of_row[i]]].value;
  }
  return out;
}

namespace {

nlohmann::json node_to_json(const Tree& tree, int32_t id) {
  const TreeNode& node = tree.nodes[id];
  if (node.is_leaf()) return {{"value", node.value}};
  nlohmann::json j;
  j["feature"] = node.feature;
  j["threshold"] = node.threshold;
  j["left"] = node_to_json(tree, node.left);
  j["right"] = node_to_json(tree, node.right);
  return j;
}

int32_t node_from_json(const nlohmann::json& j, Tree* tree) {
  const int32_t id = static_cast<int32_t>(tree->nodes.size());
  tree->nodes.emplace_back();
  if (j.contains("value")) {
    tree->nodes[id].value = j.at("value").get<double>();
    tree->nodes[id].leaf_index = tree->n_leaves++;
    return id;
  }
  tree->nodes[id].feature = j.at("feature").get<int32_t>();
  tree->nodes[id].threshold = j.at("threshold").get<double>();
  const int32_t left = node_from_json(j.at("left"), tree);
  tree->nodes[id].left = left;
  tree->nodes[id].right = node_from_json(j.at("right"), tree);
  return id;
}

}  // namespace

std::string boosted_model_to_json(const BoostedAnchorModel& m) {
  nlohmann::json j;
  j["format"] = "anchorkit-boosted";
  j["version"] = 1;
  j["task"] = m.task() == Task::regression ? "regression" : "classification";
  j["f0"] = m.f0;
  j["config"] = {{"num_trees", m.config.num_trees},
                 {"learning_rate", m.config.learning_rate},
                 {"max_depth", m.config.max_depth},
                 {"min_gain_to_split", m.config.min_gain_to_split},
                 {"min_samples_leaf", m.config.min_samples_leaf},
                 {"histogram_bins", m.config.histogram_bins},
                 {"gamma", m.config.gamma},
                 {"link", link_to_string(m.config.link)},
                 {"leaf_update", m.config.leaf_update == LeafUpdateMode::second_order
                                     ? "second_order"
                                     : "first_order_diagnostic"}};
  j["feature_names"] = m.feature_names;
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : m.trees) trees.push_back(node_to_json(t, 0));
  j["trees"] = std::move(trees);
  return j.dump(2) + "\n";
}

BoostedAnchorModel boosted_model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw data_error(std::string("model parse error: ") + e.what());
  }
  if (j.value("format", "") != "anchorkit-boosted") throw data_error("not a boosted model file");
  if (j.value("version", 0) != 1) throw data_error("unsupported model version");
  BoostedAnchorModel m;
  m.f0 = j.at("f0").get<double>();
  const auto& c = j.at("config");
  m.config.num_trees = c.at("num_trees").get<int>();
  m.config.learning_rate = c.at("learning_rate").get<double>();
  m.config.max_depth = c.at("max_depth").get<int>();
  m.config.min_gain_to_split = c.at("min_gain_to_split").get<double>();
  m.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
  m.config.histogram_bins = c.at("histogram_bins").get<int>();
  m.config.gamma = c.at("gamma").get<double>();
  m.config.link = link_from_string(c.at("link").get<std::string>());
  m.config.leaf_update = c.at("leaf_update").get<std::string>() == "first_order_diagnostic"
                             ? LeafUpdateMode::first_order_diagnostic
                             : LeafUpdateMode::second_order;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const auto& tj : j.at("trees")) {
    Tree t;
    node_from_json(tj, &t);
    m.trees.push_back(std::move(t));
  }
  return m;
}

void save_boosted_model(const BoostedAnchorModel& m, const std::string& path) {
  atomic_write_file(path, boosted_model_to_json(m));
}

BoostedAnchorModel load_boosted_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return boosted_model_from_json(buf.str());
}

}  // namespace anchor
