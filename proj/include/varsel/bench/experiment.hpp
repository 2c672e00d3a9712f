#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "varsel/bench/config.hpp"
#include "varsel/bench/scoring.hpp"
#include "varsel/cluster/cluster.hpp"
#include "varsel/common/parallel.hpp"
#include "varsel/datagen/preprocess.hpp"
#include "varsel/datagen/simulation.hpp"

namespace varsel::bench {

/// Everything fixed across replications: the preprocessed covariates, their
/// Spearman matrix, the targets and the effect size, and the cluster
/// definitions (which do not depend on the outcome).
struct Experiment {
  ExperimentConfig config;
  DataMatrix covariates;
  PreprocessReport preprocess;
  Matrix spearman;
  SimulationDesign design;
  std::vector<int> high_pool;  ///< empty when targets are given explicitly
  std::vector<int> low_pool;
  IndexSet surrogates;
  double calibration_n = 0.0;  ///< rows the effect size was calibrated for
  std::optional<cluster::ClusterAssignment> correlation_groups;
  std::optional<cluster::ClusterAssignment> bootstrap_groups;

  [[nodiscard]] bool uses(MethodId id) const;
};

/// Loads or generates the covariates, preprocesses them, fixes the targets
/// and effect, and precomputes the cluster groups the methods need. Throws
/// ConfigError when the targets cannot be drawn or lie out of range.
Experiment prepare_experiment(const ExperimentConfig& config, Exec exec = Exec::parallel);

/// Variables kept after the validation step. Univariable mode keeps p <
/// alpha per variable (no multiplicity adjustment). Lasso mode fits one
/// cross-validated lasso over the selected columns and keeps the nonzero
/// coefficients at lambda-min. Throws InvalidArgument when there are fewer
/// than 10 validation rows per outcome class.
IndexSet validate_selections(const IndexSet& selected, const Matrix& x_validation,
                             const Vector& y_validation, Family family,
                             ValidationMode mode, double alpha = 0.05, int folds = 10,
                             std::uint64_t seed = 0, double tolerance = 1e-7);

struct MethodOutcome {
  MethodId method = MethodId::univ_bfn;
  bool ok = false;
  std::string error;
  IndexSet selected;   ///< on the discovery rows
  IndexSet validated;  ///< subset of selected
  ScoreCard score;
  nlohmann::json audit = nlohmann::json::object();
};

struct ReplicationResult {
  int replication = 0;
  std::uint64_t seed = 0;  ///< all per-replication streams derive from this
  int discovery_rows = 0;
  int validation_rows = 0;
  std::vector<MethodOutcome> methods;  ///< config.methods order
  /// Univariable discovery-row coefficient per target; NaN when the fit
  /// separates or fails.
  std::vector<double> target_coefficients;
};

/// Simulates one outcome vector, splits it, runs every configured method on
/// the discovery rows and validates each selection. A failing method yields
/// a failed cell; the other methods still run.
ReplicationResult run_replication(const Experiment& experiment, int replication,
                                  Exec inner = Exec::serial);

struct DefinitionMeans {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double f2 = 0.0;  ///< mean of per-replication F2
};

struct MethodSummary {
  MethodId method = MethodId::univ_bfn;
  int replications = 0;  ///< successful cells
  int failed = 0;
  double mean_selected = 0.0;
  double mean_validated = 0.0;
  DefinitionMeans strict;
  DefinitionMeans relaxed;
  bool best_f2_strict = false;
  bool best_f2_relaxed = false;
};

/// Per-method means over successful cells, in `methods` order. Best-F2 flags
/// mark every method tied at the column maximum.
std::vector<MethodSummary> aggregate(const std::vector<ReplicationResult>& reps,
                                     const std::vector<MethodId>& methods);

struct DetectionRow {
  MethodId method = MethodId::univ_bfn;
  int target = 0;    ///< 1-based position in the target list
  int variable = 0;  ///< column index
  double rate = 0.0;  ///< fraction of successful cells that validated it
  double mean_coefficient = 0.0;  ///< over replications with a finite estimate
  int replications = 0;
};

std::vector<DetectionRow> detection_rates(const std::vector<ReplicationResult>& reps,
                                          const std::vector<int>& targets,
                                          const std::vector<MethodId>& methods);

struct RunOptions {
  int threads = 0;  ///< 0 keeps the OpenMP default
  /// Receives one line per finished replication, from a single thread.
  std::function<void(const std::string&)> progress;
};

struct ExperimentResult {
  Experiment experiment;
  std::vector<ReplicationResult> replications;
  std::string started;   ///< ISO-8601 UTC
  std::string finished;
  double seconds = 0.0;
  int threads = 1;

  [[nodiscard]] int failed_cells() const;
};

/// Prepares the experiment and runs the replications in parallel, each with
/// serial inner kernels. Output is identical for any thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

inline constexpr const char* kScorecardsFile = "scorecards.csv";
inline constexpr const char* kSummaryFile = "summary.csv";
inline constexpr const char* kDetectionFile = "detection.csv";
inline constexpr const char* kMetaFile = "run_meta.json";
inline constexpr const char* kAuditFile = "audit.jsonl";

void write_scorecards_csv(const std::filesystem::path& path, const ExperimentResult& result);
void write_summary_csv(const std::filesystem::path& path, const ExperimentResult& result);
void write_detection_csv(const std::filesystem::path& path, const ExperimentResult& result);
void write_audit_jsonl(const std::filesystem::path& path, const ExperimentResult& result);
void write_run_meta(const std::filesystem::path& path, const ExperimentResult& result);

/// Creates `dir` and writes all five files. Throws IoError on failure.
void write_outputs(const std::filesystem::path& dir, const ExperimentResult& result);

}  // namespace varsel::bench
