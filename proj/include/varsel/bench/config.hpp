#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "varsel/datagen/data_matrix.hpp"
#include "varsel/datagen/synthetic.hpp"

namespace varsel::bench {

inline constexpr int kSchemaVersion = 1;

enum class MethodId {
  univ_bfn,
  lasso_min,
  lasso_1se,
  elnet_min,
  elnet_1se,
  hclst_corr_sgl,
  hclst_boot_sgl,
  rf,
  bagging,
  bart_local,
  bart_global_se,
  bart_global_max,
};

/// All twelve methods in reporting order.
const std::vector<MethodId>& all_methods();
std::string_view method_name(MethodId id);
/// Throws ConfigError listing the valid identifiers.
MethodId parse_method(std::string_view name);

enum class ValidationMode { univariable, lasso };
std::string_view validation_name(ValidationMode mode);
ValidationMode parse_validation(std::string_view name);

/// Tuning knobs of the twelve methods. Defaults are the full-scale settings;
/// desk-scale configs lower the resampling counts.
struct MethodParameters {
  int cv_folds = 10;
  int n_lambda = 100;
  double path_tolerance = 1e-5;  ///< coordinate / block sweep stopping rule
  double screening_alpha = 0.05;  ///< Bonferroni family-wise level
  std::vector<double> elnet_alphas;  ///< empty: 0.05, 0.10, ..., 0.95
  double cluster_height = 0.2;
  int bootstrap_replicates = 1000;
  double bootstrap_threshold = 0.95;
  double sgl_mixing = 0.95;
  int forest_trees = 1000;
  int forest_subsamples = 100;
  int bagging_trees = 1000;
  int bagging_subsamples = 100;
  int bart_trees = 50;
  int bart_burn_in = 1000;
  int bart_kept = 1000;
  int bart_permutations = 100;
  double bart_alpha = 0.05;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int replications = 1;
  Family family = Family::binary;
  std::optional<SyntheticDesign> synthetic;  ///< exactly one of synthetic / csv
  std::filesystem::path csv;
  std::optional<double> beta;  ///< fixed effect; otherwise calibrated from power/alpha
  double power = 0.8;
  double effect_alpha = 5e-5;
  std::optional<int> calibration_n;  ///< default: the discovery row count
  std::vector<int> targets;    ///< explicit target columns; empty draws 5 + 5
  double surrogate_threshold = 0.8;
  double discovery_fraction = 2.0 / 3.0;
  std::vector<MethodId> methods;
  ValidationMode validation = ValidationMode::univariable;
  std::map<MethodId, ValidationMode> validation_overrides;
  double validation_alpha = 0.05;
  std::filesystem::path output_dir = "results";
  MethodParameters parameters;

  [[nodiscard]] ValidationMode validation_for(MethodId id) const;
  /// Throws ConfigError on any out-of-range field.
  void validate() const;
};

/// Parses the JSON document. Unknown keys are rejected so typos surface.
/// Relative csv paths are resolved against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {});

/// Reads and parses a config file; ConfigError on malformed JSON, IoError
/// when unreadable.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical document with every default filled in.
nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical dump, as 16 hex digits. Object keys are sorted
/// in the canonical form, so the hash ignores key order in the input file.
std::string config_hash(const ExperimentConfig& config);

}  // namespace varsel::bench
