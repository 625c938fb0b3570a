#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anchor/dataset.hpp"
#include "anchor/errors.hpp"
#include "anchor/loss.hpp"

namespace anchor {

struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x <= threshold routes left
  int32_t left = -1;
  int32_t right = -1;
  int32_t leaf_index = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root; creation is level-order
  int32_t n_leaves = 0;

  // Node id of the leaf a feature row falls into.
  int32_t route(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  double response(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

struct LeafAssignment {
  std::vector<int32_t> leaf_index;  // per row, in [0, leaf_count)
  int32_t leaf_count = 0;
};

enum class LeafUpdateMode { second_order, first_order_diagnostic };

struct BoostConfig {
  int num_trees = 1000;
  double learning_rate = 0.1;
  int max_depth = 3;
  double min_gain_to_split = 0.1;  // squared-error reduction in gradient units
  int min_samples_leaf = 20;
  int histogram_bins = 255;
  double gamma = 1.0;
  Link link = Link::identity;
  // First-order updates divide the gradient sum by the gamma=1 Hessian sum.
  // Kept as a diagnostic; diverges for large gamma.
  LeafUpdateMode leaf_update = LeafUpdateMode::second_order;
};

void validate_boost_config(const BoostConfig& config);

struct BoostedAnchorModel {
  double f0 = 0.0;
  std::vector<Tree> trees;
  BoostConfig config;
  std::vector<std::string> feature_names;
  // Anchor loss per boosting round on the training data: entry j is the loss
  // at f^j, so the log has num_trees + 1 entries.
  std::vector<double> train_loss;

  Task task() const {
    return config.link == Link::probit ? Task::classification : Task::regression;
  }
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;  // scores
  Eigen::VectorXd predict(const Dataset& d) const;
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& features) const;  // Phi(score)
};

// Prediction truncated to the first n_trees trees.
Eigen::VectorXd predict_boosted_prefix(const BoostedAnchorModel& m,
                                       const Eigen::MatrixXd& features, int n_trees);

// Thrown when training hits a non-finite loss; carries the per-round loss
// log collected up to that point.
class boost_divergence_error : public numeric_error {
 public:
  boost_divergence_error(int round_, std::vector<double> loss_log_)
      : numeric_error("non-finite anchor loss at boosting round " + std::to_string(round_)),
        round(round_),
        loss_log(std::move(loss_log_)) {}
  int round;
  std::vector<double> loss_log;
};

// mean(y) for the identity link, Phi^-1(prevalence) for probit.
double initial_score(const Eigen::VectorXd& y, Link link);

// Per-feature quantile binning into at most `max_bins` bins (exact when a
// feature has at most `max_bins` distinct values). Bin codes order-preserve:
// code(x) <= b  iff  x <= upper_edge(b).
class FeatureBins {
 public:
  FeatureBins(const Eigen::MatrixXd& features, int max_bins);

  int64_t rows() const { return n_; }
  int n_features() const { return static_cast<int>(edges_.size()); }
  int n_bins(int f) const { return static_cast<int>(edges_[f].size()); }
  double upper_edge(int f, int b) const { return edges_[f][b]; }
  const uint8_t* codes(int f) const { return codes_[f].data(); }
  const std::vector<int32_t>& global_counts(int f) const { return global_counts_[f]; }

 private:
  int64_t n_ = 0;
  std::vector<std::vector<double>> edges_;
  std::vector<std::vector<uint8_t>> codes_;
  std::vector<std::vector<int32_t>> global_counts_;
};

// Least-squares regression tree on the negative gradient, grown level-order
// with histogram split finding. A split is kept only when its squared-error
// gain is >= min_gain_to_split and both children hold >= min_samples_leaf
// rows. Leaf values are provisional (per-leaf gradient means); the boosting
// loop replaces them via solve_leaf_values.
std::pair<Tree, LeafAssignment> grow_tree(const Eigen::MatrixXd& features,
                                          const Eigen::VectorXd& negative_gradient,
                                          const BoostConfig& config);
std::pair<Tree, LeafAssignment> grow_tree_binned(const FeatureBins& bins,
                                                 const Eigen::VectorXd& negative_gradient,
                                                 const BoostConfig& config);

// Newton step for the leaf values: solves (M^T H M) b = -M^T g with the
// factored Hessian. The anchor part of M^T H M is assembled from
// per-environment column sums in O(n k + E k^2) (group-mean projections) or
// through the orthonormal basis in O(n r k); never O(n^2).
Eigen::VectorXd solve_leaf_values(const LeafAssignment& assignment, const LossEvaluation& ev);

// Diagnostic first-order update: -(sum of gradient) / (sum of gamma=1
// Hessian diagonal) per leaf.
Eigen::VectorXd first_order_leaf_values(const LeafAssignment& assignment,
                                        const LossEvaluation& ev);

BoostedAnchorModel fit_boosted(const Dataset& d, const BoostConfig& config);

// Re-estimates leaf values on target data routed through the frozen tree
// structure, using the gamma=1 loss, blended as dr*old + (1-dr)*new. Leaves
// that receive no target rows keep their source values. f0 is kept from the
// source model.
BoostedAnchorModel refit_leaves(const BoostedAnchorModel& source, const Dataset& target,
                                double dr);

std::string boosted_model_to_json(const BoostedAnchorModel& m);
BoostedAnchorModel boosted_model_from_json(const std::string& text);
void save_boosted_model(const BoostedAnchorModel& m, const std::string& path);
BoostedAnchorModel load_boosted_model(const std::string& path);

}  // namespace anchor
