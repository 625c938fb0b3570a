#include <doctest.h>

#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "anchor/errors.hpp"
#include "anchor/linear.hpp"
#include "anchor/metrics.hpp"
#include "anchor/regimes.hpp"
#include "anchor/scm.hpp"
#include "support/test_util.hpp"

using namespace anchor;

namespace {

std::vector<CurvePoint> synthetic_closed_form() {
  // source level 1.0; target_only 4/sqrt(n); refit max(0.6, 1 - 0.001 n).
  const std::vector<int64_t> sizes = {2, 3, 4, 6, 8, 11, 16, 23, 32, 45, 64, 91, 128};
  std::vector<CurvePoint> points;
  for (int64_t n : sizes) {
    const double nd = static_cast<double>(n);
    points.push_back({n, 0, Strategy::source_only, 1.0, MetricOrientation::lower_better});
    points.push_back(
        {n, 0, Strategy::target_only, 4.0 / std::sqrt(nd), MetricOrientation::lower_better});
    points.push_back({n, 0, Strategy::refit, std::max(0.6, 1.0 - 0.001 * nd),
                      MetricOrientation::lower_better});
  }
  return points;
}

}  // namespace

TEST_SUITE("regimes") {

TEST_CASE("closed-form synthetic curves yield the expected transitions") {
  const RegimeCurves curves = build_regime_curves(synthetic_closed_form());
  const TransitionPoints tp = transition_points(curves);
  REQUIRE(tp.cross.has_value());
  CHECK(std::fabs(*tp.cross - 16.0) < 0.2);  // one mesh cell at n = 16
  REQUIRE(tp.circle.has_value());
  REQUIRE(tp.square.has_value());
  CHECK(*tp.circle <= *tp.square);
  CHECK(*tp.square == doctest::Approx(16.55).epsilon(0.08));
  CHECK(tp.cross_flag == "in_range");
}

TEST_CASE("no crossings mean absent transition points") {
  std::vector<CurvePoint> points;
  for (int64_t n : {10, 20, 40, 80}) {
    points.push_back({n, 0, Strategy::source_only, 1.0, MetricOrientation::lower_better});
    points.push_back({n, 0, Strategy::refit, 1.0, MetricOrientation::lower_better});
    points.push_back({n, 0, Strategy::target_only, 2.0 + 1.0 / static_cast<double>(n),
                      MetricOrientation::lower_better});
  }
  const TransitionPoints tp = transition_points(build_regime_curves(points));
  CHECK(!tp.circle.has_value());
  CHECK(!tp.square.has_value());
  CHECK(!tp.cross.has_value());
  CHECK(tp.circle_flag == "absent");
}

TEST_CASE("higher-better orientation mirrors lower-better transitions") {
  std::vector<CurvePoint> lower = synthetic_closed_form();
  std::vector<CurvePoint> higher = lower;
  for (auto& pt : higher) {
    pt.value = -pt.value;
    pt.orientation = MetricOrientation::higher_better;
  }
  const TransitionPoints a = transition_points(build_regime_curves(lower));
  const TransitionPoints b = transition_points(build_regime_curves(higher));
  REQUIRE(a.cross.has_value());
  REQUIRE(b.cross.has_value());
  CHECK(*a.cross == doctest::Approx(*b.cross).epsilon(1e-9));
  CHECK(*a.circle == doctest::Approx(*b.circle).epsilon(1e-9));
  CHECK(*a.square == doctest::Approx(*b.square).epsilon(1e-9));
}

TEST_CASE("patient equivalent inverts the target-only curve") {
  std::vector<CurvePoint> points;
  for (int64_t n : {4, 8, 16, 32, 64, 128, 256}) {
    points.push_back({n, 0, Strategy::target_only, 4.0 / std::sqrt(static_cast<double>(n)),
                      MetricOrientation::lower_better});
    points.push_back({n, 0, Strategy::source_only, 1.0, MetricOrientation::lower_better});
    points.push_back({n, 0, Strategy::refit, 1.0, MetricOrientation::lower_better});
  }
  const RegimeCurves curves = build_regime_curves(points);

  const PatientEquivalent at_one = patient_equivalent(curves.target_only, 1.0,
                                                      MetricOrientation::lower_better);
  REQUIRE(at_one.n.has_value());
  CHECK(*at_one.n == doctest::Approx(16.0).epsilon(0.02));

  const PatientEquivalent boundary = patient_equivalent(curves.target_only, 3.0,
                                                        MetricOrientation::lower_better);
  CHECK(boundary.flag == "at_boundary");
  CHECK(*boundary.n == 4.0);

  const PatientEquivalent unreachable = patient_equivalent(curves.target_only, 0.01,
                                                           MetricOrientation::lower_better);
  CHECK(!unreachable.n.has_value());
  CHECK(unreachable.flag == "absent");

  // Monotone in the reference level: stricter references need more patients.
  const PatientEquivalent at_half = patient_equivalent(curves.target_only, 0.5,
                                                       MetricOrientation::lower_better);
  REQUIRE(at_half.n.has_value());
  CHECK(*at_half.n >= *at_one.n);
  CHECK(*at_half.n == doctest::Approx(64.0).epsilon(0.02));
}

TEST_CASE("source_only subsampling yields one identical value per cell") {
  const Dataset pool = testutil::random_dataset(200, 2, 2, 110);
  const SubsampleResult res = subsample_curve(
      pool, {25, 50}, {1, 2}, Strategy::source_only, MetricOrientation::lower_better,
      [](const Dataset&, uint64_t) { return 3.25; });
  CHECK(res.points.size() == 4);
  for (const auto& pt : res.points) CHECK(pt.value == 3.25);
  CHECK(res.warnings.empty());
}

TEST_CASE("subsets are nested within a seed and sized by groups") {
  Dataset pool = testutil::random_dataset(300, 2, 2, 111);
  pool.groups.resize(300);
  for (int i = 0; i < 300; ++i) pool.groups[i] = i / 3;  // 100 patients, 3 rows each

  std::mutex mu;
  std::map<std::pair<uint64_t, int64_t>, std::set<int64_t>> chosen;
  const SubsampleResult res = subsample_curve(
      pool, {10, 20, 40}, {7, 8}, Strategy::target_only, MetricOrientation::lower_better,
      [&](const Dataset& sub, uint64_t seed) {
        std::set<int64_t> groups(sub.groups.begin(), sub.groups.end());
        std::lock_guard<std::mutex> lock(mu);
        chosen[{seed, sub.n_rows() / 3}] = groups;
        return 0.0;
      });
  CHECK(res.points.size() == 6);
  for (uint64_t seed : {7u, 8u}) {
    const auto& s10 = chosen[{seed, 10}];
    const auto& s20 = chosen[{seed, 20}];
    const auto& s40 = chosen[{seed, 40}];
    CHECK(s10.size() == 10);
    CHECK(s20.size() == 20);
    CHECK(std::includes(s20.begin(), s20.end(), s10.begin(), s10.end()));
    CHECK(std::includes(s40.begin(), s40.end(), s20.begin(), s20.end()));
  }
}

TEST_CASE("target-only training improves with the subsample size") {
  const anchor::AnchorSCM scm = anchor::canonical_scm();
  const Dataset pool = anchor::generate_seeded(scm, 4000, 1.0, 313);
  const Dataset test = anchor::generate_seeded(scm, 4000, 1.0, 414);
  const SubsampleEvaluator eval = [&](const Dataset& sub, uint64_t) {
    const anchor::LinearAnchorModel m = anchor::fit_linear_anchor(sub, 1.0, {0.0, 1.0});
    return anchor::mse(m.predict(test.features), test.outcome);
  };
  const SubsampleResult res = subsample_curve(pool, {25, 1600}, {1, 2, 3, 4, 5},
                                              Strategy::target_only,
                                              MetricOrientation::lower_better, eval);
  std::vector<double> small, large;
  for (const auto& pt : res.points)
    (pt.n_patients == 25 ? small : large).push_back(pt.value);
  CHECK(anchor::median(large) <= anchor::median(small));
}

TEST_CASE("oversized subsample sizes are skipped with a warning") {
  const Dataset pool = testutil::random_dataset(30, 2, 2, 112);
  const SubsampleResult res = subsample_curve(
      pool, {10, 500}, {1}, Strategy::target_only, MetricOrientation::lower_better,
      [](const Dataset&, uint64_t) { return 1.0; });
  CHECK(res.points.size() == 1);
  REQUIRE(res.warnings.size() == 1);
  CHECK(res.warnings[0].find("500") != std::string::npos);
}

TEST_CASE("subsampling is deterministic") {
  const Dataset pool = testutil::random_dataset(100, 2, 2, 113);
  const SubsampleEvaluator eval = [](const Dataset& sub, uint64_t) {
    return sub.outcome.mean();
  };
  const SubsampleResult a = subsample_curve(pool, {10, 30}, {1, 2, 3},
                                            Strategy::target_only,
                                            MetricOrientation::lower_better, eval);
  const SubsampleResult b = subsample_curve(pool, {10, 30}, {1, 2, 3},
                                            Strategy::target_only,
                                            MetricOrientation::lower_better, eval);
  REQUIRE(a.points.size() == b.points.size());
  for (size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].value == b.points[i].value);
}

TEST_CASE("default size grid follows the 25/35/50/70 doubling pattern") {
  CHECK(default_size_grid(200) == std::vector<int64_t>{25, 35, 50, 70, 100, 140, 200});
  CHECK(default_size_grid(24).empty());
}

TEST_CASE("sizes must increase") {
  const Dataset pool = testutil::random_dataset(50, 2, 2, 114);
  CHECK_THROWS_AS(subsample_curve(pool, {20, 10}, {1}, Strategy::target_only,
                                  MetricOrientation::lower_better,
                                  [](const Dataset&, uint64_t) { return 0.0; }),
                  config_error);
}

}  // TEST_SUITE
