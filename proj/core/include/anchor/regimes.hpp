#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anchor/dataset.hpp"
#include "anchor/spline.hpp"

namespace anchor {

enum class Strategy { source_only, refit, target_only };
enum class MetricOrientation { lower_better, higher_better };

Strategy strategy_from_string(const std::string& s);
std::string strategy_to_string(Strategy s);

struct CurvePoint {
  int64_t n_patients = 0;
  uint64_t seed = 0;
  Strategy strategy = Strategy::source_only;
  double value = 0.0;
  MetricOrientation orientation = MetricOrientation::lower_better;
};

// Per-strategy summary: per-size medians with a 10%-90% inter-seed band and
// a monotone spline over log(n) through the medians.
struct StrategyCurve {
  std::vector<int64_t> sizes;
  std::vector<double> median_value;
  std::vector<double> band_low;   // 10% quantile over seeds
  std::vector<double> band_high;  // 90% quantile over seeds
  std::optional<MonotoneCubicSpline> spline;

  double value_at(double log_n) const { return (*spline)(log_n); }
  double band_width_at(double log_n) const;  // linear in log n, clamped at the ends
};

struct RegimeCurves {
  StrategyCurve source_only;
  StrategyCurve refit;
  StrategyCurve target_only;
  MetricOrientation orientation = MetricOrientation::lower_better;
};

RegimeCurves build_regime_curves(const std::vector<CurvePoint>& points);

// Transition points between the three regimes. A point is absent when the
// corresponding crossing does not occur within the evaluation range (capped
// at 4x the largest observed n). Flags: "in_range", "extrapolated",
// "absent". The match tolerance at n is `tolerance_factor` times the
// 10%-90% band width of the moving curve at that n.
struct TransitionPoints {
  std::optional<double> circle;  // refit starts beating source_only
  std::optional<double> square;  // target_only catches up with refit
  std::optional<double> cross;   // target_only crosses the source_only level
  std::string circle_flag = "absent";
  std::string square_flag = "absent";
  std::string cross_flag = "absent";
  double tolerance_factor = 0.25;
};

TransitionPoints transition_points(const RegimeCurves& curves);

struct PatientEquivalent {
  std::optional<double> n;
  std::string flag = "absent";  // "in_range" | "extrapolated" | "at_boundary" | "absent"
};

// Smallest n at which the target-only median curve reaches reference_level,
// inverse-interpolated on log(n); absent when unreached within 4x the
// largest observed n.
PatientEquivalent patient_equivalent(const StrategyCurve& target_only, double reference_level,
                                     MetricOrientation orientation);

// Subsampling harness. Draws nested subsets of sampling units (groups when
// present, rows otherwise) per seed and evaluates the strategy on each
// subset; sizes exceeding the available units are skipped with a warning.
struct SubsampleResult {
  std::vector<CurvePoint> points;
  std::vector<std::string> warnings;
};

using SubsampleEvaluator = std::function<double(const Dataset& subsample, uint64_t seed)>;

SubsampleResult subsample_curve(const Dataset& pool, const std::vector<int64_t>& sizes,
                                const std::vector<uint64_t>& seeds, Strategy strategy,
                                MetricOrientation orientation,
                                const SubsampleEvaluator& evaluate);

// 25, 35, 50, 70, 100, 140, ... (x sqrt(2) pattern), capped at max_n.
std::vector<int64_t> default_size_grid(int64_t max_n);

}  // namespace anchor
