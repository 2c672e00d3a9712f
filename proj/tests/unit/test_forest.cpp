#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <fstream>
#include <string>

#include "test_support.hpp"
#include "varsel/common/error.hpp"
#include "varsel/common/rng.hpp"
#include "varsel/forest/forest.hpp"

using namespace varsel;
using namespace varsel::forest;
namespace vt = varsel::testing;

namespace {

/// Exhaustive best first split: max over variables and midpoints of the
/// decrease in residual sum of squares, each child holding >= min_node rows.
struct BruteSplit {
  int variable = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

BruteSplit brute_first_split(const Matrix& x, const Vector& y, int min_node) {
  const auto sse = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double m = 0.0;
    for (double a : v) m += a;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double a : v) s += (a - m) * (a - m);
    return s;
  };
  std::vector<double> all(y.data(), y.data() + y.size());
  const double total = sse(all);
  BruteSplit best;
  for (int j = 0; j < x.cols(); ++j) {
    std::vector<double> values(x.col(j).data(), x.col(j).data() + x.rows());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double cut = (values[k] + values[k + 1]) / 2.0;
      std::vector<double> left, right;
      for (int i = 0; i < x.rows(); ++i) (x(i, j) <= cut ? left : right).push_back(y(i));
      if (static_cast<int>(left.size()) < min_node || static_cast<int>(right.size()) < min_node)
        continue;
      const double gain = total - sse(left) - sse(right);
      if (gain > best.gain + 1e-9) best = {j, cut, gain};
    }
  }
  return best;
}

bool same_structure(const ForestModel& a, const ForestModel& b) {
  if (a.trees.size() != b.trees.size()) return false;
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    const auto& na = a.trees[t].nodes;
    const auto& nb = b.trees[t].nodes;
    if (na.size() != nb.size() || a.trees[t].oob_rows != b.trees[t].oob_rows) return false;
    for (std::size_t k = 0; k < na.size(); ++k) {
      if (na[k].variable != nb[k].variable || na[k].threshold != nb[k].threshold ||
          na[k].left != nb[k].left || na[k].value != nb[k].value)
        return false;
    }
  }
  return true;
}

double oob_r2(const ForestModel& model, const Matrix& x, const Vector& y) {
  const Vector pred = model.oob_predict(x);
  double rss = 0.0, tss = 0.0;
  const double ybar = y.mean();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (std::isnan(pred(i))) continue;
    rss += (y(i) - pred(i)) * (y(i) - pred(i));
    tss += (y(i) - ybar) * (y(i) - ybar);
  }
  return 1.0 - rss / tss;
}

ForestParams small(int trees, std::uint64_t seed) {
  ForestParams params;
  params.n_trees = trees;
  params.seed = seed;
  return params;
}

}  // namespace

TEST_CASE("mtry and node-size defaults") {
  CHECK(default_mtry(1000, Family::continuous) == 334);
  CHECK(default_mtry(1000, Family::binary) == 32);
  CHECK(default_mtry(100, Family::binary) == 10);
  CHECK(default_mtry(3, Family::continuous) == 1);
  CHECK(default_mtry(1, Family::binary) == 1);
  CHECK(default_min_node(Family::continuous) == 5);
  CHECK(default_min_node(Family::binary) == 1);
}

TEST_CASE("self-prediction: y = x1 gives OOB R^2 above 0.9") {
  const Matrix x = vt::random_normal_matrix(200, 5, 11);
  const Vector y = x.col(0);
  const auto model = fit_forest(x, y, Family::continuous, small(100, 3));
  CHECK(oob_r2(model, x, y) > 0.9);
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (node.variable >= 0) {
        CHECK(node.variable < 5);
        CHECK(node.left > 0);
        CHECK(node.right == node.left + 1);
      }
    }
  }
}

TEST_CASE("single CART without bootstrap matches the exhaustive split search") {
  const Matrix x = vt::random_normal_matrix(60, 4, 21);
  SUBCASE("y = x1 splits first on x1") {
    const Vector y = x.col(0);
    ForestParams params = small(1, 1);
    params.mtry = 4;
    params.bootstrap = false;
    const auto model = fit_forest(x, y, Family::continuous, params);
    REQUIRE(model.trees.size() == 1);
    CHECK(model.trees[0].nodes[0].variable == 0);
    CHECK(model.trees[0].oob_rows.empty());
  }
  SUBCASE("root split equals brute force on a mixed signal") {
    const Vector y = x.col(2) * 1.5 + 0.7 * x.col(1).array().square().matrix() +
                     0.3 * vt::random_normal_vector(60, 22);
    for (int min_node : {1, 5}) {
      ForestParams params = small(1, 1);
      params.mtry = 4;
      params.bootstrap = false;
      params.min_node = min_node;
      const auto model = fit_forest(x, y, Family::continuous, params);
      const auto oracle = brute_first_split(x, y, min_node);
      CHECK(model.trees[0].nodes[0].variable == oracle.variable);
      CHECK(model.trees[0].nodes[0].threshold == doctest::Approx(oracle.threshold));
      // Leaves reproduce training means; each leaf holds >= min_node rows.
      CHECK(model.predict(x).mean() == doctest::Approx(y.mean()).epsilon(1e-10));
    }
  }
  SUBCASE("binary outcome: Gini root split on the threshold variable") {
    Vector y(60);
    for (int i = 0; i < 60; ++i) y(i) = x(i, 3) > 0.2 ? 1.0 : 0.0;
    ForestParams params = small(1, 1);
    params.mtry = 4;
    params.bootstrap = false;
    const auto model = fit_forest(x, y, Family::binary, params);
    const auto& root = model.trees[0].nodes[0];
    CHECK(root.variable == 3);
    // A perfect split leaves two pure children and no further nodes.
    CHECK(model.trees[0].nodes.size() == 3);
    CHECK((model.predict(x) - y).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("forest is deterministic and thread-count independent") {
  const Matrix x = vt::random_normal_matrix(120, 8, 31);
  const Vector y = x.col(0) - x.col(1) + vt::random_normal_vector(120, 32);
  ForestParams params = small(40, 9);
  const auto a = fit_forest(x, y, Family::continuous, params);
  const auto b = fit_forest(x, y, Family::continuous, params);
  CHECK(same_structure(a, b));
  params.exec = Exec::serial;
  const auto c = fit_forest(x, y, Family::continuous, params);
  CHECK(same_structure(a, c));
  params.seed = 10;
  CHECK_FALSE(same_structure(a, fit_forest(x, y, Family::continuous, params)));

  const auto va = permutation_vimp(a, x, y, Exec::parallel);
  const auto vc = permutation_vimp(c, x, y, Exec::serial);
  CHECK(va.importance == vc.importance);
  CHECK(va.baseline_error == vc.baseline_error);
}

TEST_CASE("OOB sets are bootstrap complements and OOB prediction averages trees") {
  const Matrix x = vt::random_normal_matrix(150, 6, 41);
  const Vector y = x.col(0) + 0.5 * vt::random_normal_vector(150, 42);
  const auto model = fit_forest(x, y, Family::continuous, small(60, 5));
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    // Regenerate the bootstrap draw from the documented stream.
    auto rng = make_rng(5, "forest-tree", t);
    const auto drawn = bootstrap_indices(150, rng);
    std::vector<int> complement;
    for (int i = 0; i < 150; ++i) {
      if (std::find(drawn.begin(), drawn.end(), i) == drawn.end()) complement.push_back(i);
    }
    CHECK(model.trees[t].oob_rows == complement);
  }
  const Vector oob = model.oob_predict(x);
  std::mt19937_64 pick(43);
  for (int s = 0; s < 100; ++s) {
    const int i = static_cast<int>(pick() % 150);
    double sum = 0.0;
    int count = 0;
    for (const auto& tree : model.trees) {
      if (!std::binary_search(tree.oob_rows.begin(), tree.oob_rows.end(), i)) continue;
      sum += tree.predict([&](int j) { return x(i, j); });
      ++count;
    }
    if (count == 0) {
      CHECK(std::isnan(oob(i)));
    } else {
      CHECK(oob(i) == doctest::Approx(sum / count).epsilon(1e-14));
    }
  }
}

TEST_CASE("bagging and random forest coincide when mtry coincides") {
  const Matrix x = vt::random_normal_matrix(100, 1, 51);
  const Vector y = x.col(0).array().sin().matrix() + 0.2 * vt::random_normal_vector(100, 52);
  ForestParams bagging = small(30, 7);
  bagging.mtry = 1;  // = p
  const auto rf = fit_forest(x, y, Family::continuous, small(30, 7));
  CHECK(rf.mtry == 1);
  CHECK(same_structure(rf, fit_forest(x, y, Family::continuous, bagging)));
}

TEST_CASE("permutation VIMP leaves the model unchanged") {
  const Matrix x = vt::random_normal_matrix(120, 5, 61);
  const Vector y = 2.0 * x.col(0) + vt::random_normal_vector(120, 62);
  const auto model = fit_forest(x, y, Family::continuous, small(50, 2));
  const auto copy = model;
  const auto first = permutation_vimp(model, x, y);
  const auto second = permutation_vimp(model, x, y);
  CHECK(same_structure(model, copy));
  CHECK(first.baseline_error == second.baseline_error);
  CHECK(first.importance == second.importance);

  double base = 0.0;
  int used = 0;
  for (const auto& tree : model.trees) {
    if (tree.oob_rows.empty()) continue;
    base += tree_oob_error(model, tree, x, y);
    ++used;
  }
  CHECK(first.baseline_error == doctest::Approx(base / used));
}

TEST_CASE("VIMP dominance: y = x1 ranks x1 first") {
  for (auto family : {Family::continuous, Family::binary}) {
    const Matrix x = vt::random_normal_matrix(200, 6, 71);
    Vector y = x.col(0);
    if (family == Family::binary) y = (x.col(0).array() > 0.0).cast<double>().matrix();
    const auto model = fit_forest(x, y, family, small(100, 4));
    const auto vimp = permutation_vimp(model, x, y);
    Eigen::Index top = 0;
    vimp.importance.maxCoeff(&top);
    CHECK(top == 0);
    for (int j = 1; j < 6; ++j) CHECK(vimp.importance(j) < vimp.importance(0));
  }
}

TEST_CASE("null VIMP is centered at zero") {
  // Across 50 seeds the mean VIMP of a pure-noise column, and of every column
  // when the outcome is permuted, lies within 2 SE of zero.
  constexpr int kSeeds = 50;
  Eigen::MatrixXd noise_draws(kSeeds, 1);
  Eigen::MatrixXd perm_draws(kSeeds, 4);
  for (int s = 0; s < kSeeds; ++s) {
    const Matrix x = vt::random_normal_matrix(150, 4, 1000 + s);
    const Vector y = x.col(0) + vt::random_normal_vector(150, 2000 + s);
    const auto model = fit_forest(x, y, Family::continuous, small(50, s));
    noise_draws(s, 0) = permutation_vimp(model, x, y).importance(3);

    std::mt19937_64 rng(3000 + s);
    std::vector<int> perm(150);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Vector shuffled(150);
    for (int i = 0; i < 150; ++i) shuffled(i) = y(perm[static_cast<std::size_t>(i)]);
    const auto null_model = fit_forest(x, shuffled, Family::continuous, small(50, s));
    perm_draws.row(s) = permutation_vimp(null_model, x, shuffled).importance.transpose();
  }
  const auto within = [&](const Eigen::MatrixXd& draws, int j) {
    const double mean = draws.col(j).mean();
    const double sd =
        std::sqrt((draws.col(j).array() - mean).square().sum() / (draws.rows() - 1));
    const double se = sd / std::sqrt(static_cast<double>(draws.rows()));
    return std::abs(mean) <= 2.0 * se;
  };
  CHECK(within(noise_draws, 0));
  for (int j = 0; j < 4; ++j) {
    CAPTURE(j);
    CHECK(within(perm_draws, j));
  }
}

TEST_CASE("duplicated signal keeps its lead over noise") {
  for (int s = 0; s < 20; ++s) {
    Matrix x = vt::random_normal_matrix(150, 6, 4000 + s);
    x.col(1) = x.col(0);
    const Vector y = 2.0 * x.col(0) + vt::random_normal_vector(150, 5000 + s);
    const auto model = fit_forest(x, y, Family::continuous, small(60, s));
    const auto vimp = permutation_vimp(model, x, y);
    const int lead = vimp.importance(0) >= vimp.importance(1) ? 0 : 1;
    const double low = vimp.importance(lead) - 2.0 * vimp.tree_se(lead);
    for (int j = 2; j < 6; ++j) {
      CAPTURE(s);
      CHECK(low > vimp.importance(j) + 2.0 * vimp.tree_se(j));
    }
  }
}

TEST_CASE("CI multiplier") {
  CHECK(ci_multiplier(1.0 - 0.05 / 1000) == doctest::Approx(4.0556).epsilon(1e-4));
  CHECK(ci_multiplier(0.95) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK_THROWS_AS(ci_multiplier(1.0), InvalidArgument);
}

TEST_CASE("subsampling CI: coverage for noise, power for signal") {
  SUBCASE("noise columns at p = 100 cover zero") {
    int covered = 0;
    int total = 0;
    for (int run = 0; run < 3; ++run) {
      const Matrix x = vt::random_normal_matrix(200, 100, 6000 + run);
      const Vector y = 2.0 * x.col(0) + vt::random_normal_vector(200, 6100 + run);
      VimpCiOptions options;
      options.subsamples = 50;
      options.seed = 6200 + run;
      const auto est =
          vimp_confidence_intervals(x, y, Family::continuous, small(50, run), options);
      for (const auto& e : est) {
        CHECK(e.lower <= e.vimp);
        CHECK(e.vimp <= e.upper);
        CHECK(e.upper - e.vimp == doctest::Approx(ci_multiplier(0.9995) * e.std_error));
        if (e.variable == 0) continue;
        ++total;
        covered += e.lower <= 0.0 && 0.0 <= e.upper ? 1 : 0;
      }
    }
    CHECK(covered >= 0.999 * total);
  }
  SUBCASE("y = 2 x1 + e at n = 1000 excludes zero") {
    constexpr int kRuns = 10;
    int detected = 0;
    for (int run = 0; run < kRuns; ++run) {
      const Matrix x = vt::random_normal_matrix(1000, 10, 7000 + run);
      const Vector y = 2.0 * x.col(0) + vt::random_normal_vector(1000, 7100 + run);
      VimpCiOptions options;
      options.subsamples = 50;
      options.seed = 7200 + run;
      const auto est =
          vimp_confidence_intervals(x, y, Family::continuous, small(30, run), options);
      const auto picked = select_by_vimp_ci(est);
      detected += std::count(picked.begin(), picked.end(), 0) > 0 ? 1 : 0;
    }
    CHECK(detected >= 0.95 * kRuns);
  }
}

TEST_CASE("CI selection is strict") {
  const auto est = [](double lower, double upper) {
    VimpEstimate e;
    e.lower = lower;
    e.upper = upper;
    e.vimp = (lower + upper) / 2.0;
    return e;
  };
  std::vector<VimpEstimate> all = {est(-0.1, 0.2), est(-0.03, 0.01)};
  for (std::size_t k = 0; k < all.size(); ++k) all[k].variable = static_cast<int>(k);
  CHECK(select_by_vimp_ci(all).empty());
  all.push_back(est(0.01, 0.05));
  all.back().variable = 2;
  all.push_back(est(0.0, 0.05));
  all.back().variable = 3;
  CHECK(select_by_vimp_ci(all) == IndexSet{2});
}

TEST_CASE("forest input checks") {
  const Matrix x = vt::random_normal_matrix(30, 3, 81);
  const Vector y = x.col(0);
  ForestParams params = small(5, 1);
  params.mtry = 4;
  CHECK_THROWS_AS(fit_forest(x, y, Family::continuous, params), InvalidArgument);
  CHECK_THROWS_AS(fit_forest(x, y, Family::binary, small(5, 1)), InvalidArgument);
  CHECK_THROWS_AS(fit_forest(x, Vector::Zero(29), Family::continuous, small(5, 1)),
                  InvalidArgument);
  VimpCiOptions options;
  options.subsamples = 1;
  CHECK_THROWS_AS(vimp_confidence_intervals(x, y, Family::continuous, small(5, 1), options),
                  InvalidArgument);
}

TEST_CASE("VIMP CSV export") {
  std::vector<VimpEstimate> est(2);
  est[0] = {0, 0.5, 0.1, 0.1, 0.9};
  est[1] = {1, 0.0, 0.1, -0.4, 0.4};
  const auto path = std::filesystem::temp_directory_path() / "varsel_vimp_test.csv";
  write_vimp_csv(path, est, {"age", "bmi, kg"});
  std::ifstream in(path);
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "variable,name,vimp,std_error,lower,upper,selected");
  CHECK(first == "0,age,0.5,0.1,0.1,0.9,1");
  CHECK(second == "1,\"bmi, kg\",0,0.1,-0.4,0.4,0");
  std::filesystem::remove(path);
}
