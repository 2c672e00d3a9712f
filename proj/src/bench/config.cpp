#include "varsel/bench/config.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>

#include "varsel/common/error.hpp"
#include "varsel/glm/elastic_net.hpp"

namespace varsel::bench {

namespace {

constexpr std::array<std::pair<MethodId, std::string_view>, 12> kMethodNames{{
    {MethodId::univ_bfn, "UNIV-BFN"},
    {MethodId::lasso_min, "LASSO-MIN"},
    {MethodId::lasso_1se, "LASSO-1SE"},
    {MethodId::elnet_min, "ELNET-MIN"},
    {MethodId::elnet_1se, "ELNET-1SE"},
    {MethodId::hclst_corr_sgl, "HCLST-CORR-SGL"},
    {MethodId::hclst_boot_sgl, "HCLST-BOOT-SGL"},
    {MethodId::rf, "RF"},
    {MethodId::bagging, "BAGGING"},
    {MethodId::bart_local, "BART-LOCAL"},
    {MethodId::bart_global_se, "BART-GLOBALSE"},
    {MethodId::bart_global_max, "BART-GLOBALMAX"},
}};

void reject_unknown_keys(const nlohmann::json& obj, std::string_view where,
                         std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(std::string(where) + " must be a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      std::string msg = "unknown key '" + key + "' in " + std::string(where) + " (allowed:";
      for (auto a : allowed) msg += " " + std::string(a);
      throw ConfigError(msg + ")");
    }
  }
}

template <class T>
void read(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

MethodParameters parse_parameters(const nlohmann::json& doc) {
  reject_unknown_keys(doc, "parameters",
                      {"cv_folds", "n_lambda", "path_tolerance", "screening_alpha", "elnet_alphas",
                       "cluster_height", "bootstrap_replicates", "bootstrap_threshold",
                       "sgl_mixing", "forest_trees", "forest_subsamples",
                       "bagging_trees", "bagging_subsamples", "bart_trees",
                       "bart_burn_in", "bart_kept", "bart_permutations", "bart_alpha"});
  MethodParameters m;
  read(doc, "cv_folds", m.cv_folds);
  read(doc, "n_lambda", m.n_lambda);
  read(doc, "path_tolerance", m.path_tolerance);
  read(doc, "screening_alpha", m.screening_alpha);
  read(doc, "elnet_alphas", m.elnet_alphas);
  read(doc, "cluster_height", m.cluster_height);
  read(doc, "bootstrap_replicates", m.bootstrap_replicates);
  read(doc, "bootstrap_threshold", m.bootstrap_threshold);
  read(doc, "sgl_mixing", m.sgl_mixing);
  read(doc, "forest_trees", m.forest_trees);
  read(doc, "forest_subsamples", m.forest_subsamples);
  read(doc, "bagging_trees", m.bagging_trees);
  read(doc, "bagging_subsamples", m.bagging_subsamples);
  read(doc, "bart_trees", m.bart_trees);
  read(doc, "bart_burn_in", m.bart_burn_in);
  read(doc, "bart_kept", m.bart_kept);
  read(doc, "bart_permutations", m.bart_permutations);
  read(doc, "bart_alpha", m.bart_alpha);
  return m;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

const std::vector<MethodId>& all_methods() {
  static const std::vector<MethodId> ids = [] {
    std::vector<MethodId> out;
    for (const auto& [id, name] : kMethodNames) out.push_back(id);
    return out;
  }();
  return ids;
}

std::string_view method_name(MethodId id) {
  for (const auto& [known, name] : kMethodNames) {
    if (known == id) return name;
  }
  return "?";
}

MethodId parse_method(std::string_view name) {
  for (const auto& [id, known] : kMethodNames) {
    if (known == name) return id;
  }
  std::string msg = "unknown method '" + std::string(name) + "'; valid methods:";
  for (const auto& [id, known] : kMethodNames) msg += " " + std::string(known);
  throw ConfigError(msg);
}

std::string_view validation_name(ValidationMode mode) {
  return mode == ValidationMode::lasso ? "lasso" : "univariable";
}

ValidationMode parse_validation(std::string_view name) {
  if (name == "univariable") return ValidationMode::univariable;
  if (name == "lasso") return ValidationMode::lasso;
  throw ConfigError("unknown validation mode '" + std::string(name) +
                    "' (expected univariable or lasso)");
}

ValidationMode ExperimentConfig::validation_for(MethodId id) const {
  const auto it = validation_overrides.find(id);
  return it == validation_overrides.end() ? validation : it->second;
}

void ExperimentConfig::validate() const {
  require(replications >= 1, "replications must be >= 1");
  require(synthetic.has_value() != !csv.empty(),
          "covariates need exactly one of 'synthetic' or 'csv'");
  if (beta) require(std::isfinite(*beta), "effect.beta must be finite");
  if (!beta) {
    require(in_open_unit(power), "effect.power must lie in (0, 1)");
    require(in_open_unit(effect_alpha), "effect.alpha must lie in (0, 1)");
    require(!calibration_n || *calibration_n >= 10, "effect.n must be >= 10");
  }
  std::set<int> unique(targets.begin(), targets.end());
  require(unique.size() == targets.size(), "targets contain duplicates");
  require(std::all_of(targets.begin(), targets.end(), [](int t) { return t >= 0; }),
          "targets must be non-negative column indices");
  require(in_open_unit(surrogate_threshold), "surrogate_threshold must lie in (0, 1)");
  require(in_open_unit(discovery_fraction), "discovery_fraction must lie in (0, 1)");
  require(!methods.empty(), "methods list is empty");
  require(in_open_unit(validation_alpha), "validation.alpha must lie in (0, 1)");

  const auto& m = parameters;
  require(m.cv_folds >= 3, "parameters.cv_folds must be >= 3");
  require(m.n_lambda >= 2, "parameters.n_lambda must be >= 2");
  require(m.path_tolerance > 0.0 && m.path_tolerance < 1.0,
          "parameters.path_tolerance must lie in (0, 1)");
  require(in_open_unit(m.screening_alpha), "parameters.screening_alpha must lie in (0, 1)");
  require(std::all_of(m.elnet_alphas.begin(), m.elnet_alphas.end(),
                      [](double a) { return a > 0.0 && a <= 1.0; }),
          "parameters.elnet_alphas must lie in (0, 1]");
  require(m.cluster_height > 0.0 && m.cluster_height <= 1.0,
          "parameters.cluster_height must lie in (0, 1]");
  require(m.bootstrap_replicates >= 1, "parameters.bootstrap_replicates must be >= 1");
  require(m.bootstrap_threshold > 0.0 && m.bootstrap_threshold <= 1.0,
          "parameters.bootstrap_threshold must lie in (0, 1]");
  require(m.sgl_mixing >= 0.0 && m.sgl_mixing <= 1.0,
          "parameters.sgl_mixing must lie in [0, 1]");
  require(m.forest_trees >= 1 && m.bagging_trees >= 1, "forest tree counts must be >= 1");
  require(m.forest_subsamples >= 2 && m.bagging_subsamples >= 2,
          "forest subsample counts must be >= 2");
  require(m.bart_trees >= 1 && m.bart_burn_in >= 0 && m.bart_kept >= 1,
          "BART chain settings out of range");
  require(m.bart_permutations >= 50, "parameters.bart_permutations must be >= 50");
  require(in_open_unit(m.bart_alpha), "parameters.bart_alpha must lie in (0, 1)");
}

ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir) {
  try {
    reject_unknown_keys(doc, "config",
                        {"schema_version", "seed", "replications", "family", "covariates",
                         "effect", "targets", "surrogate_threshold", "discovery_fraction",
                         "methods", "validation", "output_dir", "parameters"});
    const int version = doc.value("schema_version", kSchemaVersion);
    if (version != kSchemaVersion) {
      throw ConfigError("unsupported schema_version " + std::to_string(version) +
                        " (this build reads " + std::to_string(kSchemaVersion) + ")");
    }
    ExperimentConfig c;
    read(doc, "seed", c.seed);
    read(doc, "replications", c.replications);
    if (doc.contains("family")) {
      try {
        c.family = parse_family(doc.at("family").get<std::string>());
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    }

    const auto& cov = doc.at("covariates");
    reject_unknown_keys(cov, "covariates", {"synthetic", "csv"});
    if (cov.contains("synthetic")) c.synthetic = synthetic_design_from_json(cov.at("synthetic"));
    if (cov.contains("csv")) {
      std::filesystem::path path = cov.at("csv").get<std::string>();
      c.csv = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    }

    if (doc.contains("effect")) {
      const auto& e = doc.at("effect");
      reject_unknown_keys(e, "effect", {"beta", "power", "alpha", "n"});
      if (e.contains("beta")) c.beta = e.at("beta").get<double>();
      read(e, "power", c.power);
      read(e, "alpha", c.effect_alpha);
      if (e.contains("n")) c.calibration_n = e.at("n").get<int>();
    }
    read(doc, "targets", c.targets);
    read(doc, "surrogate_threshold", c.surrogate_threshold);
    read(doc, "discovery_fraction", c.discovery_fraction);

    if (doc.contains("methods")) {
      for (const auto& name : doc.at("methods")) {
        c.methods.push_back(parse_method(name.get<std::string>()));
      }
    } else {
      c.methods = all_methods();
    }

    if (doc.contains("validation")) {
      const auto& v = doc.at("validation");
      reject_unknown_keys(v, "validation", {"mode", "alpha", "overrides"});
      if (v.contains("mode")) c.validation = parse_validation(v.at("mode").get<std::string>());
      read(v, "alpha", c.validation_alpha);
      if (v.contains("overrides")) {
        for (const auto& [name, mode] : v.at("overrides").items()) {
          c.validation_overrides[parse_method(name)] =
              parse_validation(mode.get<std::string>());
        }
      }
    }
    if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();
    if (doc.contains("parameters")) c.parameters = parse_parameters(doc.at("parameters"));
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json cov = nlohmann::json::object();
  if (c.synthetic) cov["synthetic"] = varsel::to_json(*c.synthetic);
  if (!c.csv.empty()) cov["csv"] = c.csv.generic_string();

  nlohmann::json effect = nlohmann::json::object();
  if (c.beta) {
    effect["beta"] = *c.beta;
  } else {
    effect["power"] = c.power;
    effect["alpha"] = c.effect_alpha;
    if (c.calibration_n) effect["n"] = *c.calibration_n;
  }

  nlohmann::json methods = nlohmann::json::array();
  for (auto id : c.methods) methods.push_back(method_name(id));
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [id, mode] : c.validation_overrides) {
    overrides[std::string(method_name(id))] = validation_name(mode);
  }

  const auto& m = c.parameters;
  const auto alphas = m.elnet_alphas.empty() ? glm::default_alpha_grid() : m.elnet_alphas;
  nlohmann::json params = {
      {"cv_folds", m.cv_folds},
      {"n_lambda", m.n_lambda},
      {"path_tolerance", m.path_tolerance},
      {"screening_alpha", m.screening_alpha},
      {"elnet_alphas", alphas},
      {"cluster_height", m.cluster_height},
      {"bootstrap_replicates", m.bootstrap_replicates},
      {"bootstrap_threshold", m.bootstrap_threshold},
      {"sgl_mixing", m.sgl_mixing},
      {"forest_trees", m.forest_trees},
      {"forest_subsamples", m.forest_subsamples},
      {"bagging_trees", m.bagging_trees},
      {"bagging_subsamples", m.bagging_subsamples},
      {"bart_trees", m.bart_trees},
      {"bart_burn_in", m.bart_burn_in},
      {"bart_kept", m.bart_kept},
      {"bart_permutations", m.bart_permutations},
      {"bart_alpha", m.bart_alpha},
  };

  return {
      {"schema_version", kSchemaVersion},
      {"seed", c.seed},
      {"replications", c.replications},
      {"family", to_string(c.family)},
      {"covariates", cov},
      {"effect", effect},
      {"targets", c.targets},
      {"surrogate_threshold", c.surrogate_threshold},
      {"discovery_fraction", c.discovery_fraction},
      {"methods", methods},
      {"validation",
       {{"mode", validation_name(c.validation)},
        {"alpha", c.validation_alpha},
        {"overrides", overrides}}},
      {"output_dir", c.output_dir.generic_string()},
      {"parameters", params},
  };
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace varsel::bench
