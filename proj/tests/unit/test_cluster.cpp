#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "test_support.hpp"
#include "varsel/cluster/cluster.hpp"
#include "varsel/common/error.hpp"
#include "varsel/datagen/synthetic.hpp"

using namespace varsel;
using namespace varsel::cluster;
namespace vt = varsel::testing;

namespace {

DataMatrix as_data(const Matrix& x) {
  return DataMatrix(x, default_column_names(static_cast<int>(x.cols())));
}

Matrix random_distance(int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  Matrix d = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) d(i, j) = d(j, i) = u(rng);
  return d;
}

/// Textbook complete linkage over explicit member sets: O(p^3) per step, pair
/// order by (smallest member, smallest member).
std::vector<std::pair<std::set<int>, double>> naive_linkage(const Matrix& d) {
  std::vector<std::set<int>> clusters;
  for (int i = 0; i < d.rows(); ++i) clusters.push_back({i});
  std::vector<std::pair<std::set<int>, double>> merges;
  while (clusters.size() > 1) {
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double link = 0;
        for (int a : clusters[i])
          for (int b : clusters[j]) link = std::max(link, d(a, b));
        if (link < best) {
          best = link;
          bi = i;
          bj = j;
        }
      }
    }
    std::set<int> merged = clusters[bi];
    merged.insert(clusters[bj].begin(), clusters[bj].end());
    merges.emplace_back(merged, best);
    clusters.erase(clusters.begin() + static_cast<long>(bj));
    clusters[bi] = merged;
  }
  return merges;
}

std::set<int> leaves_of(const Dendrogram& dend, int node) {
  if (node < dend.leaf_count) return {node};
  const auto& m = dend.merges[static_cast<std::size_t>(node - dend.leaf_count)];
  auto a = leaves_of(dend, m.left);
  auto b = leaves_of(dend, m.right);
  a.insert(b.begin(), b.end());
  return a;
}

/// True when every group of `fine` sits inside one group of `coarse`.
bool refines(const ClusterAssignment& fine, const ClusterAssignment& coarse) {
  std::vector<int> image(static_cast<std::size_t>(fine.count), -1);
  for (std::size_t j = 0; j < fine.group_of.size(); ++j) {
    auto& slot = image[static_cast<std::size_t>(fine.group_of[j])];
    if (slot < 0) slot = coarse.group_of[j];
    if (slot != coarse.group_of[j]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("Spearman distance examples") {
  Matrix x(5, 4);
  x.col(0) << 1, 2, 3, 4, 5;
  x.col(1) << 1, 3, 2, 5, 4;
  x.col(2) = -x.col(0);
  x.col(3) = x.col(0);
  auto d = spearman_distance_matrix(as_data(x));
  CHECK(d(0, 1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(d(0, 2) == doctest::Approx(0.0));
  CHECK(d(0, 3) == doctest::Approx(0.0));
  CHECK(d.diagonal().isZero(0.0));
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.minCoeff() >= 0.0);
  CHECK(d.maxCoeff() <= 1.0);
}

TEST_CASE("Spearman input errors") {
  Matrix x = vt::random_normal_matrix(10, 3, 1);
  x.col(1).setConstant(4.0);
  try {
    spearman_matrix(as_data(x));
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("V2") != std::string::npos);
  }
  CHECK_THROWS_AS(spearman_matrix(as_data(vt::random_normal_matrix(2, 3, 1))), InvalidArgument);
}

TEST_CASE("fast Spearman matches the reference and the brute-force oracle") {
  Matrix x = vt::random_normal_matrix(60, 12, 5);
  x = (x.array() * 3.0).round().matrix();  // plenty of ties
  x.col(4) = x.col(3).array().exp();
  const auto data = as_data(x);
  const Matrix ref = spearman_matrix_reference(data);
  const Matrix serial = spearman_matrix(data, Exec::serial);
  const Matrix parallel = spearman_matrix(data, Exec::parallel);
  CHECK((serial - ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(serial == parallel);
  CHECK(ref(2, 7) == doctest::Approx(vt::spearman_oracle(x, 2, 7)).epsilon(1e-12));
  CHECK(serial(3, 4) == doctest::Approx(1.0));
}

TEST_CASE("complete linkage hand traces") {
  SUBCASE("two leaves") {
    Matrix d(2, 2);
    d << 0, 0.4, 0.4, 0;
    auto dend = agglomerate_complete_linkage(d);
    REQUIRE(dend.merges.size() == 1);
    CHECK(dend.merges[0].left == 0);
    CHECK(dend.merges[0].right == 1);
    CHECK(dend.merges[0].height == 0.4);
  }
  SUBCASE("three leaves") {
    Matrix d(3, 3);
    d << 0, 0.1, 0.9, 0.1, 0, 0.9, 0.9, 0.9, 0;
    auto dend = agglomerate_complete_linkage(d);
    REQUIRE(dend.merges.size() == 2);
    CHECK(dend.merges[0].left == 0);
    CHECK(dend.merges[0].right == 1);
    CHECK(dend.merges[0].height == 0.1);
    CHECK(dend.merges[0].size == 2);
    CHECK(dend.merges[1].left == 3);
    CHECK(dend.merges[1].right == 2);
    CHECK(dend.merges[1].height == 0.9);
    CHECK(dend.merges[1].size == 3);

    auto cut = cut_dendrogram(dend, 0.2);
    CHECK(cut.count == 2);
    CHECK(cut.group_of == std::vector<int>{0, 0, 1});
  }
  SUBCASE("complete linkage uses the maximum, not the minimum") {
    Matrix d(3, 3);
    d << 0, 0.1, 0.5, 0.1, 0, 0.95, 0.5, 0.95, 0;
    auto dend = agglomerate_complete_linkage(d);
    CHECK(dend.merges[1].height == 0.95);
  }
  SUBCASE("ties break lexicographically") {
    Matrix d = Matrix::Constant(4, 4, 0.5);
    d.diagonal().setZero();
    auto dend = agglomerate_complete_linkage(d);
    CHECK(dend.merges[0].left == 0);
    CHECK(dend.merges[0].right == 1);
    CHECK(dend.merges[1].left == 4);
    CHECK(dend.merges[1].right == 2);
    CHECK(dend.merges[2].left == 5);
    CHECK(dend.merges[2].right == 3);
  }
}

TEST_CASE("complete linkage agrees with the textbook algorithm") {
  for (int rep = 0; rep < 30; ++rep) {
    const int p = 3 + rep % 13;
    Matrix d = random_distance(p, 100 + rep);
    if (rep % 3 == 0) d = (d.array() * 4).round() / 4;  // heavy ties
    d.diagonal().setZero();
    auto dend = agglomerate_complete_linkage(d);
    auto naive = naive_linkage(d);
    REQUIRE(dend.merges.size() == naive.size());
    for (std::size_t k = 0; k < naive.size(); ++k) {
      CHECK(dend.merges[k].height == naive[k].second);
      CHECK(leaves_of(dend, dend.leaf_count + static_cast<int>(k)) == naive[k].first);
    }
  }
}

TEST_CASE("dendrogram heights are monotone") {
  for (int rep = 0; rep < 50; ++rep) {
    auto dend = agglomerate_complete_linkage(random_distance(25, 500 + rep));
    REQUIRE(dend.merges.size() == 24);
    for (std::size_t k = 1; k < dend.merges.size(); ++k) {
      CHECK(dend.merges[k].height >= dend.merges[k - 1].height);
    }
    CHECK(dend.merges.back().size == 25);
  }
}

TEST_CASE("cuts at the extremes") {
  auto dend = agglomerate_complete_linkage(random_distance(10, 9));
  auto none = cut_dendrogram(dend, 0.0);
  CHECK(none.count == 10);
  for (int j = 0; j < 10; ++j) CHECK(none.group_of[static_cast<std::size_t>(j)] == j);
  auto all = cut_dendrogram(dend, 1.0 + 1e-9);
  CHECK(all.count == 1);
}

TEST_CASE("cuts are nested in the height") {
  for (int rep = 0; rep < 100; ++rep) {
    auto dend = agglomerate_complete_linkage(random_distance(20, 1000 + rep));
    const std::vector<double> heights{0.1, 0.2, 0.4, 0.6, 0.8};
    for (std::size_t k = 1; k < heights.size(); ++k) {
      CHECK(refines(cut_dendrogram(dend, heights[k - 1]), cut_dendrogram(dend, heights[k])));
    }
  }
}

TEST_CASE("groups cut at 0.2 are linked by |rho| > 0.8") {
  SyntheticDesign design;
  design.p = 30;
  design.n = 300;
  design.blocks = {{4, 0.95}, {3, 0.85}, {5, 0.7}, {2, 0.99}};
  design.seed = 3;
  auto data = generate_synthetic_covariates(design);
  const Matrix corr = spearman_matrix(data);
  auto cut = cut_dendrogram(agglomerate_complete_linkage(correlation_to_distance(corr)), 0.2);
  int multi = 0;
  for (const auto& g : cut.groups()) {
    if (g.size() < 2) continue;
    ++multi;
    for (int a : g) {
      bool linked = false;
      for (int b : g)
        if (a != b && std::abs(corr(a, b)) > 0.8) linked = true;
      CHECK(linked);
    }
  }
  CHECK(multi >= 2);
}

TEST_CASE("clade check") {
  Matrix d(4, 4);
  d << 0, 0.1, 0.5, 0.6, 0.1, 0, 0.55, 0.65, 0.5, 0.55, 0, 0.3, 0.6, 0.65, 0.3, 0;
  auto dend = agglomerate_complete_linkage(d);
  CHECK(is_clade(dend, {0, 1}));
  CHECK(is_clade(dend, {2, 3}));
  CHECK_FALSE(is_clade(dend, {1, 2}));
  CHECK_FALSE(is_clade(dend, {0, 1, 2}));
  CHECK(is_clade(dend, {0, 1, 2, 3}));
}

TEST_CASE("bootstrap keeps a near-duplicate pair") {
  Matrix x = vt::random_normal_matrix(2000, 4, 21);
  x.col(1) = x.col(0) + 0.02 * x.col(1);
  StabilityOptions opts;
  opts.replicates = 100;
  opts.seed = 5;
  auto res = bootstrap_cluster_stability(as_data(x), opts);
  REQUIRE(res.candidates.size() == 1);
  CHECK(res.candidates[0] == IndexSet{0, 1});
  CHECK(res.support[0] == 100);
  CHECK(res.assignment.group_of[0] == res.assignment.group_of[1]);
  CHECK(res.assignment.count == 3);
}

TEST_CASE("bootstrap splits an accidental pair") {
  // Exchangeable triple: which pair merges first is down to sampling noise.
  SyntheticDesign design;
  design.p = 3;
  design.n = 400;
  design.blocks = {{3, 0.5}};
  design.seed = 31;
  const auto data = generate_synthetic_covariates(design);
  auto dend = agglomerate_complete_linkage(spearman_distance_matrix(data));
  StabilityOptions opts;
  opts.replicates = 200;
  opts.height = dend.merges[0].height + 1e-9;
  opts.seed = 6;
  auto res = bootstrap_cluster_stability(data, opts);
  REQUIRE(res.candidates.size() == 1);
  MESSAGE("support of the accidental pair: " << res.support[0] << "/200");
  CHECK(res.support[0] < 0.8 * 200);
  CHECK(res.assignment.count == 3);
}

TEST_CASE("bootstrap without resampling reproduces the cut") {
  SyntheticDesign design;
  design.p = 15;
  design.n = 100;
  design.blocks = {{3, 0.9}, {3, 0.8}};
  design.seed = 8;
  auto data = generate_synthetic_covariates(design);
  StabilityOptions opts;
  opts.replicates = 5;
  opts.resample = false;
  auto res = bootstrap_cluster_stability(data, opts);
  auto cut = cut_dendrogram(agglomerate_complete_linkage(spearman_distance_matrix(data)), 0.2);
  CHECK(res.assignment.group_of == cut.group_of);
}

TEST_CASE("bootstrap output refines the cut, ignores row order and thread count") {
  SyntheticDesign design;
  design.p = 20;
  design.n = 150;
  design.blocks = {{3, 0.95}, {4, 0.85}, {2, 0.75}};
  design.seed = 10;
  auto data = generate_synthetic_covariates(design);
  StabilityOptions opts;
  opts.replicates = 100;
  opts.seed = 11;
  opts.exec = Exec::serial;
  auto serial = bootstrap_cluster_stability(data, opts);
  opts.exec = Exec::parallel;
  auto parallel = bootstrap_cluster_stability(data, opts);
  CHECK(serial.support == parallel.support);
  CHECK(serial.assignment.group_of == parallel.assignment.group_of);

  auto cut = cut_dendrogram(agglomerate_complete_linkage(spearman_distance_matrix(data)), 0.2);
  CHECK(refines(serial.assignment, cut));

  std::mt19937_64 rng(12);
  std::vector<int> perm(150);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  DataMatrix shuffled(select_rows(data.values, perm), data.names);
  auto permuted = bootstrap_cluster_stability(shuffled, opts);
  CHECK(permuted.support == serial.support);
  CHECK(permuted.assignment.group_of == serial.assignment.group_of);
}

TEST_CASE("resamples with a constant column are redrawn") {
  Matrix x = vt::random_normal_matrix(20, 3, 41);
  x.col(2).setZero();
  x(0, 2) = 1.0;
  x(1, 2) = 2.0;
  x.col(1) = x.col(0) * 2.0 + 0.01 * x.col(1);
  StabilityOptions opts;
  opts.replicates = 50;
  opts.seed = 42;
  auto res = bootstrap_cluster_stability(as_data(x), opts);
  CHECK(res.redraws > 0);
}

TEST_CASE("dendrogram CSV export") {
  Matrix d(3, 3);
  d << 0, 0.1, 0.9, 0.1, 0, 0.9, 0.9, 0.9, 0;
  auto path = std::filesystem::temp_directory_path() / "varsel_dend.csv";
  write_dendrogram_csv(path, agglomerate_complete_linkage(d), {"a", "b", "c"});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,left,right,height,size,left_label,right_label");
  std::getline(in, line);
  CHECK(line == "0,0,1,0.1,2,a,b");
  std::getline(in, line);
  CHECK(line == "1,3,2,0.9,3,node3,c");
}
