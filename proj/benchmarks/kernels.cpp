// Serial reference vs OpenMP kernels. Argument 0 runs Exec::serial, 1 runs
// Exec::parallel; set OMP_NUM_THREADS to choose the worker count.

#include <benchmark/benchmark.h>

#include <random>

#include "varsel/bart/bart.hpp"
#include "varsel/cluster/cluster.hpp"
#include "varsel/common/parallel.hpp"
#include "varsel/datagen/simulation.hpp"
#include "varsel/datagen/synthetic.hpp"
#include "varsel/forest/forest.hpp"
#include "varsel/glm/elastic_net.hpp"

using namespace varsel;

namespace {

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial"
                                     : "parallel x" + std::to_string(thread_count()));
}

DataMatrix covariates(int n, int p) {
  SyntheticDesign design;
  design.n = n;
  design.p = p;
  design.seed = 3;
  for (int b = 0; b < p / 10; ++b) design.blocks.push_back({5, 0.9});
  return generate_synthetic_covariates(design);
}

struct Problem {
  Matrix x;
  Vector y;
};

const Problem& binary_problem() {
  static const Problem problem = [] {
    Problem pr;
    pr.x = covariates(600, 100).values;
    Vector beta = Vector::Zero(10);
    beta.setConstant(0.4);
    pr.y = simulate_outcomes(pr.x.leftCols(10), beta, Family::binary, 5).y;
    return pr;
  }();
  return problem;
}

void BM_SpearmanMatrix(benchmark::State& state) {
  const auto m = covariates(600, 400);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cluster::spearman_matrix(m, exec_of(state)));
  }
  label(state);
}

void BM_SpearmanReference(benchmark::State& state) {
  const auto m = covariates(600, 400);
  for (auto _ : state) benchmark::DoNotOptimize(cluster::spearman_matrix_reference(m));
}

void BM_CrossValidatedLasso(benchmark::State& state) {
  const auto& pr = binary_problem();
  const auto folds = glm::make_folds(pr.y, Family::binary, 10, 11);
  glm::PathOptions options;
  options.tolerance = 1e-4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        glm::cross_validate(pr.x, pr.y, Family::binary, 1.0, folds, options, exec_of(state)));
  }
  label(state);
}

void BM_ForestTrees(benchmark::State& state) {
  const auto& pr = binary_problem();
  forest::ForestParams params;
  params.n_trees = 200;
  params.seed = 13;
  params.exec = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forest::fit_forest(pr.x, pr.y, Family::binary, params));
  }
  label(state);
}

void BM_ForestVimp(benchmark::State& state) {
  const auto& pr = binary_problem();
  forest::ForestParams params;
  params.n_trees = 200;
  params.seed = 13;
  const auto model = forest::fit_forest(pr.x, pr.y, Family::binary, params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forest::permutation_vimp(model, pr.x, pr.y, exec_of(state)));
  }
  label(state);
}

void BM_BootstrapClustering(benchmark::State& state) {
  const auto m = covariates(600, 100);
  cluster::StabilityOptions options;
  options.replicates = 50;
  options.seed = 17;
  options.exec = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cluster::bootstrap_cluster_stability(m, options));
  }
  label(state);
}

void BM_BartPermutationNull(benchmark::State& state) {
  const auto& pr = binary_problem();
  bart::BartParams params;
  params.burn_in = 50;
  params.kept = 50;
  params.store_trees = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bart::permutation_null(pr.x, pr.y, Family::binary, params, 50, 19, exec_of(state)));
  }
  label(state);
}

}  // namespace

BENCHMARK(BM_SpearmanMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpearmanReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossValidatedLasso)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestTrees)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestVimp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapClustering)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BartPermutationNull)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
