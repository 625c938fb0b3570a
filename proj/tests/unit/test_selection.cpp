#include <doctest.h>

#include "anchor/errors.hpp"
#include "anchor/linear.hpp"
#include "anchor/scm.hpp"
#include "anchor/selection.hpp"
#include "support/test_util.hpp"

using namespace anchor;

namespace {

GammaTrainer linear_trainer() {
  return [](const Dataset& train, double gamma, const Dataset& test) {
    return fit_linear_anchor(train, gamma, {0.0, 1.0}).predict(test.features);
  };
}

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("default grids match the documented values") {
  CHECK(default_gamma_grid(4) == std::vector<double>{1, 2, 4, 8});
  CHECK(default_dr_grid() == std::vector<double>{0.0, 0.2, 0.4, 0.6, 0.8, 1.0});
  const auto alpha = default_alpha_grid();
  CHECK(alpha.front() == doctest::Approx(10.0));
  CHECK(alpha.back() == doctest::Approx(1e-3));
  CHECK(alpha.size() == 9);
  CHECK(alpha[1] == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("identical environments select the smallest gamma") {
  // Two environments with the same distribution: the penalty cannot help and
  // ties resolve toward gamma = 1.
  Dataset d = testutil::random_dataset(200, 2, 1, 90);
  DiscreteAnchor disc;
  disc.labels = {"a", "b"};
  disc.env.resize(200);
  for (int i = 0; i < 200; ++i) disc.env[i] = i < 100 ? 0 : 1;
  // Duplicate rows so both environments are literally identical.
  for (int i = 0; i < 100; ++i) {
    d.features.row(100 + i) = d.features.row(i);
    d.outcome[100 + i] = d.outcome[i];
  }
  d.anchor = std::move(disc);
  const LoeoResult res = loeo_select_gamma(d, {1.0, 2.0, 4.0}, linear_trainer());
  CHECK(res.selected_gamma == 1.0);
}

TEST_CASE("singleton grid returns its value with a full table") {
  const Dataset d = testutil::random_dataset(120, 2, 3, 91);
  const LoeoResult res = loeo_select_gamma(d, {1.0}, linear_trainer());
  CHECK(res.selected_gamma == 1.0);
  CHECK(res.table.size() == 3);
  for (const auto& row : res.table) {
    CHECK(row.metric == "mse");
    CHECK(row.n > 0);
  }
}

TEST_CASE("fewer than two environments is an error") {
  const Dataset d = testutil::random_dataset(50, 2, 1, 92);
  CHECK_THROWS_AS(loeo_select_gamma(d, {1.0, 2.0}, linear_trainer()), data_error);
}

TEST_CASE("score table has |grid| x |envs| rows and no hidden state") {
  const Dataset d = testutil::random_dataset(150, 3, 3, 93);
  const std::vector<double> grid = {1.0, 4.0};
  const LoeoResult res = loeo_select_gamma(d, grid, linear_trainer());
  CHECK(res.table.size() == 6);
  const LoeoResult res2 = loeo_select_gamma(d, grid, linear_trainer());
  for (size_t i = 0; i < res.table.size(); ++i)
    CHECK(res.table[i].value == res2.table[i].value);
}

TEST_CASE("confounded SCM selects gamma > 1 in the median over seeds") {
  const AnchorSCM scm = canonical_scm();
  std::vector<double> selected;
  for (uint64_t s = 0; s < 9; ++s) {
    const Dataset d = generate_seeded(scm, 900, 1.0, mix_seed(0x10EB, s));
    selected.push_back(
        loeo_select_gamma(d, {1.0, 2.0, 4.0, 8.0, 16.0}, linear_trainer()).selected_gamma);
  }
  std::sort(selected.begin(), selected.end());
  CHECK(selected[selected.size() / 2] > 1.0);
}

TEST_CASE("kfold assignment validates sizes and groups") {
  const Dataset tiny = testutil::random_dataset(4, 2, 1, 94);
  CHECK_THROWS_AS(kfold_assignment(tiny, 5), data_error);

  Dataset grouped = testutil::random_dataset(40, 2, 1, 95);
  grouped.groups.resize(40);
  for (int i = 0; i < 40; ++i) grouped.groups[i] = i / 10;  // 4 groups
  CHECK_THROWS_AS(kfold_assignment(grouped, 5), data_error);
  const auto folds = kfold_assignment(grouped, 4);
  // Rows of one group share a fold.
  for (int i = 0; i < 40; ++i) CHECK(folds[i] == folds[(i / 10) * 10]);
}

TEST_CASE("kfold selection returns grid members and honors tie-breaks") {
  const Dataset target = testutil::random_dataset(60, 2, 2, 96);
  std::vector<RefitCandidate> grid;
  for (double g : {1.0, 2.0})
    for (double dr : {0.0, 0.5, 1.0}) grid.push_back({g, dr});

  // Evaluator ignoring the candidate: every score ties, so the tie-break
  // must pick the largest dr and then the smallest gamma.
  const RefitEvaluator constant_eval = [](const RefitCandidate&, const Dataset&,
                                          const Dataset& fold_test) {
    return Eigen::VectorXd::Zero(fold_test.n_rows());
  };
  const KfoldSelection tie = kfold_refit_select(grid, target, 5, constant_eval);
  CHECK(tie.selected.param == 1.0);
  CHECK(tie.selected.gamma == 1.0);

  // A real evaluator never returns a pair outside the grid.
  const RefitEvaluator real_eval = [](const RefitCandidate& c, const Dataset& fold_train,
                                      const Dataset& fold_test) {
    const LinearAnchorModel m = fit_linear_anchor(fold_train, c.gamma, {0.0, 1.0});
    return Eigen::VectorXd((1.0 - c.param) * m.predict(fold_test.features));
  };
  const KfoldSelection sel = kfold_refit_select(grid, target, 5, real_eval);
  bool found = false;
  for (const auto& c : grid)
    if (c.gamma == sel.selected.gamma && c.param == sel.selected.param) found = true;
  CHECK(found);
  CHECK(sel.table.size() == grid.size() * 5);
}

TEST_CASE("best candidate's CV score is no worse than dr=1's") {
  const AnchorSCM scm = canonical_scm();
  const Dataset source_data = generate(scm, 1500, 1.0);
  const LinearAnchorModel source = fit_linear_anchor(source_data, 4.0, {0.0, 1.0});
  const Dataset target = generate_seeded(scm, 300, 1.2, 4242);

  std::vector<RefitCandidate> grid;
  for (double a : {1e-3, 1.0, 1e3}) grid.push_back({4.0, a});
  const RefitEvaluator eval = [&](const RefitCandidate& c, const Dataset& fold_train,
                                  const Dataset& fold_test) {
    return refit_empirical_bayes(source, fold_train, c.param, {0.0, 1.0})
        .predict(fold_test.features);
  };
  const KfoldSelection sel = kfold_refit_select(grid, target, 5, eval);
  double score_tightest = 0.0;
  for (int f = 0; f < 5; ++f) score_tightest += sel.table[2 * 5 + f].value / 5.0;
  CHECK(sel.cv_score <= score_tightest + 1e-12);
}

TEST_CASE("singleton candidate grid is returned unchanged") {
  const Dataset target = testutil::random_dataset(30, 2, 2, 97);
  const RefitEvaluator eval = [](const RefitCandidate&, const Dataset&,
                                 const Dataset& fold_test) {
    return Eigen::VectorXd::Zero(fold_test.n_rows());
  };
  const KfoldSelection sel = kfold_refit_select({{2.0, 0.4}}, target, 5, eval);
  CHECK(sel.selected.gamma == 2.0);
  CHECK(sel.selected.param == 0.4);
}

}  // TEST_SUITE
