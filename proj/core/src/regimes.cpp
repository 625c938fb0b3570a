#include "anchor/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "anchor/errors.hpp"
#include "anchor/parallel.hpp"
#include "anchor/rng.hpp"

namespace anchor {

Strategy strategy_from_string(const std::string& s) {
  if (s == "source_only") return Strategy::source_only;
  if (s == "refit") return Strategy::refit;
  if (s == "target_only") return Strategy::target_only;
  throw config_error("unknown strategy: '" + s + "'");
}

std::string strategy_to_string(Strategy s) {
  switch (s) {
    case Strategy::source_only: return "source_only";
    case Strategy::refit: return "refit";
    case Strategy::target_only: return "target_only";
  }
  return "source_only";
}

double StrategyCurve::band_width_at(double log_n) const {
  const size_t k = sizes.size();
  std::vector<double> lx(k);
  for (size_t i = 0; i < k; ++i) lx[i] = std::log(static_cast<double>(sizes[i]));
  if (log_n <= lx.front()) return band_high.front() - band_low.front();
  if (log_n >= lx.back()) return band_high.back() - band_low.back();
  const auto it = std::upper_bound(lx.begin(), lx.end(), log_n);
  const size_t i = static_cast<size_t>(it - lx.begin()) - 1;
  const double w = (log_n - lx[i]) / (lx[i + 1] - lx[i]);
  const double lo = (1.0 - w) * band_low[i] + w * band_low[i + 1];
  const double hi = (1.0 - w) * band_high[i] + w * band_high[i + 1];
  return hi - lo;
}

namespace {

StrategyCurve summarize(const std::vector<CurvePoint>& points, Strategy strategy,
                        Monotonicity direction) {
  std::map<int64_t, std::vector<double>> by_n;
  for (const auto& pt : points)
    if (pt.strategy == strategy) by_n[pt.n_patients].push_back(pt.value);
  if (by_n.size() < 2)
    throw data_error("regime curves need at least 2 sizes for strategy " +
                     strategy_to_string(strategy));
  StrategyCurve curve;
  std::vector<std::pair<int64_t, double>> median_points;
  for (auto& [n, vals] : by_n) {
    curve.sizes.push_back(n);
    curve.median_value.push_back(median(vals));
    curve.band_low.push_back(quantile(vals, 0.10));
    curve.band_high.push_back(quantile(vals, 0.90));
    median_points.emplace_back(n, curve.median_value.back());
  }
  curve.spline = fit_monotone_spline(median_points, direction);
  return curve;
}

}  // namespace

RegimeCurves build_regime_curves(const std::vector<CurvePoint>& points) {
  if (points.empty()) throw data_error("no curve points");
  RegimeCurves out;
  out.orientation = points.front().orientation;
  for (const auto& pt : points) {
    if (pt.orientation != out.orientation)
      throw data_error("curve points mix metric orientations");
  }
  // Performance improves with n in the favorable direction; source_only is
  // flat, so pin its direction too.
  const Monotonicity dir = out.orientation == MetricOrientation::lower_better
                               ? Monotonicity::decreasing
                               : Monotonicity::increasing;
  out.source_only = summarize(points, Strategy::source_only, dir);
  out.refit = summarize(points, Strategy::refit, dir);
  out.target_only = summarize(points, Strategy::target_only, dir);
  return out;
}

namespace {

constexpr int kMeshPoints = 513;
constexpr double kExtrapolationCap = 4.0;

struct Mesh {
  std::vector<double> log_n;
  double max_observed_log_n = 0.0;
};

Mesh common_mesh(const RegimeCurves& curves) {
  int64_t min_n = std::numeric_limits<int64_t>::max();
  int64_t max_n = 0;
  for (const StrategyCurve* c : {&curves.source_only, &curves.refit, &curves.target_only}) {
    min_n = std::min(min_n, c->sizes.front());
    max_n = std::max(max_n, c->sizes.back());
  }
  Mesh mesh;
  mesh.max_observed_log_n = std::log(static_cast<double>(max_n));
  const double lo = std::log(static_cast<double>(min_n));
  const double hi = std::log(kExtrapolationCap * static_cast<double>(max_n));
  mesh.log_n.resize(kMeshPoints);
  for (int i = 0; i < kMeshPoints; ++i)
    mesh.log_n[i] = lo + (hi - lo) * static_cast<double>(i) / (kMeshPoints - 1);
  return mesh;
}

// First root of g (>= 0 means the condition holds) on the mesh at or after
// from_log_n, linearly inverse-interpolated in log n. Returns the log-n
// position.
std::optional<double> first_crossing(const Mesh& mesh, const std::function<double(double)>& g,
                                     double from_log_n = -1e300) {
  const double start = std::max(mesh.log_n.front(), from_log_n);
  double prev = g(start);
  if (prev >= 0.0) return start;
  for (size_t i = 1; i < mesh.log_n.size(); ++i) {
    if (mesh.log_n[i] <= start) continue;
    const double cur = g(mesh.log_n[i]);
    if (cur >= 0.0) {
      const double lo = std::max(start, mesh.log_n[i - 1]);
      const double span = cur - prev;
      const double w = span > 0.0 ? (0.0 - prev) / span : 1.0;
      return lo + w * (mesh.log_n[i] - lo);
    }
    prev = cur;
  }
  return std::nullopt;
}

}  // namespace

TransitionPoints transition_points(const RegimeCurves& curves) {
  const double sign = curves.orientation == MetricOrientation::lower_better ? 1.0 : -1.0;
  const Mesh mesh = common_mesh(curves);
  TransitionPoints out;

  auto finish = [&](const std::optional<double>& root, std::optional<double>* n,
                    std::string* flag) {
    if (!root) {
      *flag = "absent";
      return;
    }
    *n = std::exp(*root);
    *flag = *root > mesh.max_observed_log_n ? "extrapolated" : "in_range";
  };

  // circle: refit strictly beats the source_only level by more than tau.
  finish(first_crossing(mesh,
                        [&](double ln) {
                          const double tau =
                              out.tolerance_factor * curves.refit.band_width_at(ln);
                          const double margin = sign * (curves.source_only.value_at(ln) -
                                                        curves.refit.value_at(ln));
                          return margin - tau - 1e-12;
                        }),
         &out.circle, &out.circle_flag);

  // square: target_only matches-or-beats refit within tau. The regimes are
  // ordered, so the search starts at the circle when one exists.
  const double square_from = out.circle ? std::log(*out.circle) : -1e300;
  finish(first_crossing(mesh,
                        [&](double ln) {
                          const double tau =
                              out.tolerance_factor * curves.target_only.band_width_at(ln);
                          const double margin = sign * (curves.refit.value_at(ln) -
                                                        curves.target_only.value_at(ln));
                          return margin + tau;
                        },
                        square_from),
         &out.square, &out.square_flag);

  // cross: target_only crosses the source_only level.
  finish(first_crossing(mesh,
                        [&](double ln) {
                          return sign * (curves.source_only.value_at(ln) -
                                         curves.target_only.value_at(ln));
                        }),
         &out.cross, &out.cross_flag);
  return out;
}

PatientEquivalent patient_equivalent(const StrategyCurve& target_only, double reference_level,
                                     MetricOrientation orientation) {
  const double sign = orientation == MetricOrientation::lower_better ? 1.0 : -1.0;
  const double lo = std::log(static_cast<double>(target_only.sizes.front()));
  const double max_obs = std::log(static_cast<double>(target_only.sizes.back()));
  const double hi = std::log(kExtrapolationCap * static_cast<double>(target_only.sizes.back()));

  PatientEquivalent out;
  auto g = [&](double ln) { return sign * (reference_level - target_only.value_at(ln)); };
  if (g(lo) >= 0.0) {
    out.n = static_cast<double>(target_only.sizes.front());
    out.flag = "at_boundary";
    return out;
  }
  double prev = g(lo);
  const int steps = kMeshPoints;
  for (int i = 1; i < steps; ++i) {
    const double ln = lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
    const double cur = g(ln);
    if (cur >= 0.0) {
      const double prev_ln = lo + (hi - lo) * static_cast<double>(i - 1) / (steps - 1);
      const double span = cur - prev;
      const double w = span > 0.0 ? -prev / span : 1.0;
      const double root = prev_ln + w * (ln - prev_ln);
      out.n = std::exp(root);
      out.flag = root > max_obs ? "extrapolated" : "in_range";
      return out;
    }
    prev = cur;
  }
  return out;
}

SubsampleResult subsample_curve(const Dataset& pool, const std::vector<int64_t>& sizes,
                                const std::vector<uint64_t>& seeds, Strategy strategy,
                                MetricOrientation orientation,
                                const SubsampleEvaluator& evaluate) {
  if (sizes.empty()) throw config_error("no subsample sizes");
  for (size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1]) throw config_error("subsample sizes must be increasing");
  if (seeds.empty()) throw config_error("no seeds");

  // Sampling units: groups when present, otherwise rows.
  std::vector<std::vector<int64_t>> unit_rows;
  if (pool.has_groups()) {
    std::unordered_map<int64_t, size_t> unit_of_group;
    for (int64_t i = 0; i < pool.n_rows(); ++i) {
      auto [it, inserted] = unit_of_group.emplace(pool.groups[i], unit_rows.size());
      if (inserted) unit_rows.emplace_back();
      unit_rows[it->second].push_back(i);
    }
  } else {
    unit_rows.resize(pool.n_rows());
    for (int64_t i = 0; i < pool.n_rows(); ++i) unit_rows[i] = {i};
  }
  const int64_t n_units = static_cast<int64_t>(unit_rows.size());

  SubsampleResult result;
  std::vector<int64_t> usable_sizes;
  for (int64_t s : sizes) {
    if (s > n_units) {
      result.warnings.push_back("size " + std::to_string(s) + " skipped: only " +
                                std::to_string(n_units) + " sampling units available");
    } else {
      usable_sizes.push_back(s);
    }
  }

  const size_t cells = seeds.size() * usable_sizes.size();
  result.points.resize(cells);
  parallel_jobs(static_cast<int64_t>(cells), [&](int64_t job) {
    const size_t si = static_cast<size_t>(job) / usable_sizes.size();
    const size_t zi = static_cast<size_t>(job) % usable_sizes.size();
    const uint64_t seed = seeds[si];
    // Nested subsets: one permutation per seed, prefixes per size.
    std::vector<int64_t> perm(n_units);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(mix_seed(seed, 0x5ab5a301eULL));
    rng.shuffle(perm);
    std::vector<int64_t> rows;
    std::vector<bool> chosen(n_units, false);
    for (int64_t u = 0; u < usable_sizes[zi]; ++u) chosen[perm[u]] = true;
    for (int64_t u = 0; u < n_units; ++u) {
      if (!chosen[u]) continue;
      rows.insert(rows.end(), unit_rows[u].begin(), unit_rows[u].end());
    }
    std::sort(rows.begin(), rows.end());
    const Dataset sub = subset_rows(pool, rows);
    CurvePoint pt;
    pt.n_patients = usable_sizes[zi];
    pt.seed = seed;
    pt.strategy = strategy;
    pt.orientation = orientation;
    pt.value = evaluate(sub, seed);
    result.points[job] = pt;
  });
  return result;
}

std::vector<int64_t> default_size_grid(int64_t max_n) {
  static const int64_t bases[] = {25, 35};
  std::vector<int64_t> sizes;
  for (int64_t scale = 1; scale <= max_n; scale *= 2) {
    for (int64_t b : bases) {
      const int64_t s = b * scale;
      if (s <= max_n) sizes.push_back(s);
    }
  }
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

}  // namespace anchor
