#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "test_support.hpp"
#include "varsel/common/csv.hpp"
#include "varsel/common/parallel.hpp"
#include "varsel/common/rng.hpp"
#include "varsel/common/stats.hpp"

using namespace varsel;

TEST_CASE("derive_seed separates labels and indices") {
  CHECK(derive_seed(1, "a", 0) == derive_seed(1, "a", 0));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "b", 0));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
  CHECK(derive_seed(1, "a", 0) != derive_seed(2, "a", 0));
}

TEST_CASE("sampling helpers") {
  Rng rng(7);
  auto perm = random_permutation(50, rng);
  CHECK(std::set<int>(perm.begin(), perm.end()).size() == 50);
  auto boot = bootstrap_indices(50, rng);
  CHECK(boot.size() == 50);
  for (int i : boot) CHECK((i >= 0 && i < 50));
  auto draw = sample_without_replacement(50, 20, rng);
  CHECK(std::set<int>(draw.begin(), draw.end()).size() == 20);
}

TEST_CASE("normal and t tails") {
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-9));
  CHECK(stats::normal_two_sided_p(1.959963985) == doctest::Approx(0.05).epsilon(1e-8));
  // t with 10 df: P(|T| > 2.228138852) = 0.05
  CHECK(stats::student_t_two_sided_p(2.228138852, 10) == doctest::Approx(0.05).epsilon(1e-7));
  CHECK(stats::expit(800.0) == 1.0);
  CHECK(stats::expit(-800.0) >= 0.0);
  CHECK(stats::expit(0.0) == 0.5);
}

TEST_CASE("quantile uses linear interpolation between order statistics") {
  CHECK(stats::quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(stats::quantile({1, 2, 3, 4}, 0.9) == doctest::Approx(3.7));
  CHECK(stats::quantile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(stats::quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(stats::median({5, 1, 9, 3}) == 4.0);
}

TEST_CASE("mid_ranks agree with brute-force ranks") {
  std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5};
  auto got = stats::mid_ranks(x);
  auto want = varsel::testing::brute_ranks(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(got[i] == want[i]);
}

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = g(rng) * std::pow(10.0, (i % 21) - 10);
    CHECK(std::stod(csv::format_double(v)) == v);
  }
  CHECK(csv::format_double(0.1) == "0.1");
}

TEST_CASE("csv record quoting") {
  auto f = csv::split_record(R"(a,"b,c","d""e",)");
  REQUIRE(f.size() == 4);
  CHECK(f[1] == "b,c");
  CHECK(f[2] == "d\"e");
  CHECK(f[3].empty());
  CHECK(csv::join_record({"x", "y,z"}) == R"(x,"y,z")");
}

TEST_CASE("for_each_index rethrows the lowest failing index") {
  for (Exec exec : {Exec::serial, Exec::parallel}) {
    std::vector<int> out(64, 0);
    try {
      for_each_index(64, exec, [&](int i) {
        out[static_cast<std::size_t>(i)] = i;
        if (i == 40 || i == 17) throw std::runtime_error(std::to_string(i));
      });
      FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "17");
    }
    CHECK(out[63] == 63);
  }
}
