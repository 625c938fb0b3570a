#include "anchor/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "anchor/errors.hpp"
#include "anchor/gaussian.hpp"

namespace anchor {

double mse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& outcomes) {
  if (predictions.size() != outcomes.size()) throw data_error("mse: length mismatch");
  if (predictions.size() == 0) throw data_error("mse: empty input");
  return (predictions - outcomes).squaredNorm() / static_cast<double>(predictions.size());
}

double probit_nll(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  if (scores.size() != labels.size()) throw data_error("nll: length mismatch");
  if (scores.size() == 0) throw data_error("nll: empty input");
  double total = 0.0;
  for (int64_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw data_error("nll: label outside {-1,+1} at row " + std::to_string(i + 1));
    total -= log_norm_cdf(labels[i] * scores[i]);
  }
  return total / static_cast<double>(scores.size());
}

double auprc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  const int64_t n = scores.size();
  if (labels.size() != n) throw data_error("auprc: length mismatch");
  if (n == 0) throw data_error("auprc: empty input");
  int64_t total_pos = 0;
  for (int64_t i = 0; i < n; ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw data_error("auprc: label outside {-1,+1} at row " + std::to_string(i + 1));
    if (labels[i] == 1.0) ++total_pos;
  }
  if (total_pos == 0) throw data_error("auprc: no positive labels");

  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  double ap = 0.0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t i = 0;
  while (i < n) {
    int64_t j = i;
    int64_t tp_add = 0;
    int64_t fp_add = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1.0) {
        ++tp_add;
      } else {
        ++fp_add;
      }
      ++j;
    }
    tp += tp_add;
    fp += fp_add;
    if (tp_add > 0) {
      const double recall_inc = static_cast<double>(tp_add) / static_cast<double>(total_pos);
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      ap += recall_inc * precision;
    }
    i = j;
  }
  return ap;
}

}  // namespace anchor
