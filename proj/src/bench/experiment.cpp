#include "varsel/bench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "varsel/bart/bart.hpp"
#include "varsel/common/csv.hpp"
#include "varsel/common/error.hpp"
#include "varsel/common/rng.hpp"
#include "varsel/datagen/csv_matrix.hpp"
#include "varsel/datagen/synthetic.hpp"
#include "varsel/forest/forest.hpp"
#include "varsel/glm/elastic_net.hpp"
#include "varsel/glm/univariable.hpp"
#include "varsel/sgl/sgl.hpp"

namespace varsel::bench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Computes a shared intermediate once; a failure is remembered and
/// rethrown to every method that depends on it.
template <class T>
class Lazy {
 public:
  explicit Lazy(std::function<T()> make) : make_(std::move(make)) {}

  const T& get() {
    if (!done_) {
      done_ = true;
      try {
        value_.emplace(make_());
      } catch (...) {
        error_ = std::current_exception();
      }
    }
    if (error_) std::rethrow_exception(error_);
    return *value_;
  }

 private:
  std::function<T()> make_;
  std::optional<T> value_;
  std::exception_ptr error_;
  bool done_ = false;
};

struct BartCache {
  Vector ip;
  bool uniform_fallback = false;
  Matrix null;
};

nlohmann::json cv_audit(const glm::PenalizedFit& fit, glm::LambdaRule rule) {
  const int index = rule == glm::LambdaRule::min ? fit.index_min : fit.index_1se;
  return {{"lambda", fit.lambda[static_cast<std::size_t>(index)]},
          {"lambda_index", index},
          {"cv_error", fit.cv_mean[static_cast<std::size_t>(index)]},
          {"grid_size", fit.lambda.size()}};
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::string fmt(double v) { return csv::format_double(v); }

}  // namespace

bool Experiment::uses(MethodId id) const {
  return std::find(config.methods.begin(), config.methods.end(), id) != config.methods.end();
}

Experiment prepare_experiment(const ExperimentConfig& config, Exec exec) {
  config.validate();
  Experiment e;
  e.config = config;
  const DataMatrix raw = config.synthetic ? generate_synthetic_covariates(*config.synthetic)
                                          : load_csv_matrix(config.csv);
  auto pre = preprocess(raw);
  e.covariates = std::move(pre.data);
  e.preprocess = std::move(pre.report);
  const int n = e.covariates.rows();
  const int p = e.covariates.cols();
  e.spearman = cluster::spearman_matrix(e.covariates, exec);

  std::vector<int> targets = config.targets;
  if (targets.empty()) {
    try {
      auto pick = select_target_variables(e.spearman, derive_seed(config.seed, "targets"));
      e.high_pool = std::move(pick.high_pool);
      e.low_pool = std::move(pick.low_pool);
      targets = std::move(pick.targets);
    } catch (const InvalidArgument& err) {
      throw ConfigError(std::string("cannot draw targets: ") + err.what());
    }
  }
  for (int t : targets) {
    if (t >= p) {
      throw ConfigError("target column " + std::to_string(t) + " out of range (p = " +
                        std::to_string(p) + " after preprocessing)");
    }
  }

  const int discovery = static_cast<int>(std::lround(config.discovery_fraction * n));
  e.calibration_n = config.calibration_n.value_or(discovery);
  const double effect =
      config.beta ? *config.beta
                  : required_effect_size(config.power, config.effect_alpha,
                                         static_cast<int>(e.calibration_n), config.family);
  e.design = SimulationDesign::make(targets, p, effect, config.family, config.seed);
  e.surrogates = surrogate_pool(e.design.targets, e.spearman, config.surrogate_threshold);

  const auto& params = config.parameters;
  if (e.uses(MethodId::hclst_corr_sgl)) {
    const auto tree = cluster::agglomerate_complete_linkage(cluster::correlation_to_distance(e.spearman));
    e.correlation_groups = cluster::cut_dendrogram(tree, params.cluster_height);
  }
  if (e.uses(MethodId::hclst_boot_sgl)) {
    cluster::StabilityOptions opts;
    opts.replicates = params.bootstrap_replicates;
    opts.height = params.cluster_height;
    opts.threshold = params.bootstrap_threshold;
    opts.seed = derive_seed(config.seed, "cluster-bootstrap");
    opts.exec = exec;
    e.bootstrap_groups = cluster::bootstrap_cluster_stability(e.covariates, opts).assignment;
  }
  return e;
}

IndexSet validate_selections(const IndexSet& selected, const Matrix& x_validation,
                             const Vector& y_validation, Family family,
                             ValidationMode mode, double alpha, int folds,
                             std::uint64_t seed, double tolerance) {
  const int classes = family == Family::binary ? 2 : 1;
  if (x_validation.rows() < 10 * classes) {
    throw InvalidArgument("validation set has " + std::to_string(x_validation.rows()) +
                          " rows; at least " + std::to_string(10 * classes) + " needed");
  }
  if (x_validation.rows() != y_validation.size()) {
    throw InvalidArgument("validation X and y row counts differ");
  }
  if (selected.empty()) return {};

  IndexSet kept;
  if (mode == ValidationMode::univariable) {
    std::span<const double> ys(y_validation.data(), static_cast<std::size_t>(y_validation.size()));
    for (int j : selected) {
      std::span<const double> xs(x_validation.col(j).data(),
                                 static_cast<std::size_t>(x_validation.rows()));
      if (glm::fit_univariable(xs, ys, family, j).p_value < alpha) kept.push_back(j);
    }
    return kept;
  }

  const Matrix sub = select_cols(x_validation, selected);
  glm::PathOptions path;
  path.tolerance = tolerance;
  const auto cv = glm::cross_validate(sub, y_validation, family, 1.0, folds, seed, path,
                                      Exec::serial);
  for (int k : glm::selected_variables(cv, glm::LambdaRule::min)) {
    kept.push_back(selected[static_cast<std::size_t>(k)]);
  }
  return kept;
}

ReplicationResult run_replication(const Experiment& experiment, int replication,
                                  Exec inner) {
  const auto& config = experiment.config;
  const auto& params = config.parameters;
  const auto& design = experiment.design;
  const Family family = config.family;
  const Matrix& x = experiment.covariates.values;

  ReplicationResult result;
  result.replication = replication;
  result.seed = derive_seed(config.seed, "replication", static_cast<std::uint64_t>(replication));
  const std::uint64_t seed = result.seed;

  const Vector beta = Vector::Constant(static_cast<Eigen::Index>(design.targets.size()), design.effect);
  const Vector y = simulate_outcomes(select_cols(x, design.targets), beta, family,
                                     derive_seed(seed, "outcome")).y;
  const auto split = split_discovery_validation(static_cast<int>(x.rows()),
                                                config.discovery_fraction,
                                                derive_seed(seed, "split"));
  const Matrix xd = select_rows(x, split.discovery);
  const Vector yd = select_entries(y, split.discovery);
  const Matrix xv = select_rows(x, split.validation);
  const Vector yv = select_entries(y, split.validation);
  result.discovery_rows = static_cast<int>(xd.rows());
  result.validation_rows = static_cast<int>(xv.rows());
  const int p = static_cast<int>(x.cols());

  for (int t : design.targets) {
    double coef = kNaN;
    try {
      const auto fit = glm::fit_univariable({xd.col(t).data(), static_cast<std::size_t>(xd.rows())},
                                            {yd.data(), static_cast<std::size_t>(yd.size())},
                                            family, t);
      if (std::isfinite(fit.coefficient) && std::isfinite(fit.std_error)) coef = fit.coefficient;
    } catch (const Error&) {
    }
    result.target_coefficients.push_back(coef);
  }

  Lazy<glm::Folds> folds([&] {
    return glm::make_folds(yd, family, params.cv_folds, derive_seed(seed, "folds"));
  });
  glm::PathOptions path;
  path.n_lambda = params.n_lambda;
  path.tolerance = params.path_tolerance;
  sgl::SglOptions sgl_options;
  sgl_options.n_lambda = params.n_lambda;
  sgl_options.tolerance = params.path_tolerance;

  Lazy<glm::PenalizedFit> lasso([&] {
    return glm::cross_validate(xd, yd, family, 1.0, folds.get(), path, inner);
  });
  Lazy<glm::AlphaSearch> elnet([&] {
    const auto alphas = params.elnet_alphas.empty() ? glm::default_alpha_grid() : params.elnet_alphas;
    return glm::grid_search_alpha(xd, yd, family, alphas, folds.get(), path, inner);
  });
  Lazy<BartCache> bart_cache([&] {
    bart::BartParams bp;
    bp.trees = params.bart_trees;
    bp.burn_in = params.bart_burn_in;
    bp.kept = params.bart_kept;
    bp.seed = derive_seed(seed, "BART");
    bp.store_trees = false;
    BartCache c;
    const auto ip = bart::inclusion_proportions(bart::fit_bart(xd, yd, family, bp));
    c.ip = ip.values;
    c.uniform_fallback = ip.uniform_fallback;
    c.null = bart::permutation_null(xd, yd, family, bp, params.bart_permutations,
                                    derive_seed(seed, "BART-null"), inner);
    return c;
  });

  auto run_sgl = [&](const cluster::ClusterAssignment& groups, MethodOutcome& out) {
    sgl::GroupedPenaltySpec spec;
    spec.groups = groups;
    spec.mixing = params.sgl_mixing;
    const auto fit = sgl::sgl_cross_validate(xd, yd, family, spec, folds.get(), sgl_options, inner);
    out.selected = sgl::sgl_selected_variables(fit);
    out.audit = cv_audit(fit, glm::LambdaRule::min);
    out.audit["groups"] = groups.count;
    out.audit["mixing"] = params.sgl_mixing;
  };

  auto run_forest = [&](MethodOutcome& out, bool bagging) {
    forest::ForestParams fp;
    fp.n_trees = bagging ? params.bagging_trees : params.forest_trees;
    fp.mtry = bagging ? p : 0;
    fp.seed = derive_seed(seed, bagging ? "BAGGING" : "RF");
    fp.exec = inner;
    forest::VimpCiOptions ci;
    ci.subsamples = bagging ? params.bagging_subsamples : params.forest_subsamples;
    ci.seed = derive_seed(fp.seed, "ci");
    ci.exec = inner;
    const auto estimates = forest::vimp_confidence_intervals(xd, yd, family, fp, ci);
    out.selected = forest::select_by_vimp_ci(estimates);
    const double level = 1.0 - 0.05 / p;
    out.audit = {{"trees", fp.n_trees},
                 {"mtry", bagging ? p : forest::default_mtry(p, family)},
                 {"subsamples", ci.subsamples},
                 {"level", level},
                 {"multiplier", forest::ci_multiplier(level)}};
  };

  auto run_bart = [&](MethodOutcome& out, MethodId rule) {
    const auto& c = bart_cache.get();
    const double a = params.bart_alpha;
    if (rule == MethodId::bart_local) {
      out.selected = bart::select_local(c.ip, c.null, a);
    } else if (rule == MethodId::bart_global_se) {
      out.selected = bart::select_global_se(c.ip, c.null, a);
      out.audit["multiplier"] = bart::global_se_multiplier(c.null, a);
    } else {
      out.selected = bart::select_global_max(c.ip, c.null, a);
      out.audit["threshold"] = bart::global_max_threshold(c.null, a);
    }
    out.audit["permutations"] = c.null.rows();
    out.audit["uniform_fallback"] = c.uniform_fallback;
  };

  const std::vector<int> scored_targets =
      design.effect == 0.0 ? std::vector<int>{} : design.targets;

  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    const MethodId id = config.methods[k];
    MethodOutcome out;
    out.method = id;
    const auto started = std::chrono::steady_clock::now();
    try {
      switch (id) {
        case MethodId::univ_bfn: {
          const auto fits = glm::fit_univariable_all(xd, yd, family, inner);
          out.selected = glm::bonferroni_select(fits, params.screening_alpha, p);
          out.audit = {{"threshold", params.screening_alpha / p}};
          break;
        }
        case MethodId::lasso_min:
        case MethodId::lasso_1se: {
          const auto rule = id == MethodId::lasso_min ? glm::LambdaRule::min : glm::LambdaRule::one_se;
          out.selected = glm::selected_variables(lasso.get(), rule);
          out.audit = cv_audit(lasso.get(), rule);
          break;
        }
        case MethodId::elnet_min:
        case MethodId::elnet_1se: {
          const auto rule = id == MethodId::elnet_min ? glm::LambdaRule::min : glm::LambdaRule::one_se;
          const auto& search = elnet.get();
          out.selected = glm::selected_variables(search.fit, rule);
          out.audit = cv_audit(search.fit, rule);
          out.audit["alpha"] = search.best_alpha;
          break;
        }
        case MethodId::hclst_corr_sgl:
          run_sgl(*experiment.correlation_groups, out);
          break;
        case MethodId::hclst_boot_sgl:
          run_sgl(*experiment.bootstrap_groups, out);
          break;
        case MethodId::rf:
        case MethodId::bagging:
          run_forest(out, id == MethodId::bagging);
          break;
        case MethodId::bart_local:
        case MethodId::bart_global_se:
        case MethodId::bart_global_max:
          run_bart(out, id);
          break;
      }
      const ValidationMode mode = config.validation_for(id);
      out.validated = validate_selections(out.selected, xv, yv, family, mode,
                                          config.validation_alpha, params.cv_folds,
                                          derive_seed(seed, "validation", k),
                                          params.path_tolerance);
      out.audit["validation"] = validation_name(mode);
      out.score = score_selection(out.validated, scored_targets, experiment.spearman,
                                  config.surrogate_threshold);
      out.ok = true;
    } catch (const std::exception& err) {
      out.ok = false;
      out.error = err.what();
      out.selected.clear();
      out.validated.clear();
    }
    out.audit["seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.methods.push_back(std::move(out));
  }
  return result;
}

std::vector<MethodSummary> aggregate(const std::vector<ReplicationResult>& reps,
                                     const std::vector<MethodId>& methods) {
  std::vector<MethodSummary> out;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    MethodSummary s;
    s.method = methods[k];
    for (const auto& rep : reps) {
      const auto it = std::find_if(rep.methods.begin(), rep.methods.end(),
                                   [&](const MethodOutcome& m) { return m.method == methods[k]; });
      if (it == rep.methods.end()) continue;
      if (!it->ok) {
        ++s.failed;
        continue;
      }
      ++s.replications;
      s.mean_selected += static_cast<double>(it->selected.size());
      s.mean_validated += static_cast<double>(it->validated.size());
      const auto add = [](DefinitionMeans& m, const Counts& c) {
        m.tp += c.tp;
        m.fp += c.fp;
        m.fn += c.fn;
        m.f2 += c.f2;
      };
      add(s.strict, it->score.strict);
      add(s.relaxed, it->score.relaxed);
    }
    if (s.replications > 0) {
      const double r = s.replications;
      s.mean_selected /= r;
      s.mean_validated /= r;
      for (auto* m : {&s.strict, &s.relaxed}) {
        m->tp /= r;
        m->fp /= r;
        m->fn /= r;
        m->f2 /= r;
      }
    }
    out.push_back(s);
  }
  double best_strict = -1.0;
  double best_relaxed = -1.0;
  for (const auto& s : out) {
    if (s.replications == 0) continue;
    best_strict = std::max(best_strict, s.strict.f2);
    best_relaxed = std::max(best_relaxed, s.relaxed.f2);
  }
  for (auto& s : out) {
    if (s.replications == 0) continue;
    s.best_f2_strict = s.strict.f2 == best_strict;
    s.best_f2_relaxed = s.relaxed.f2 == best_relaxed;
  }
  return out;
}

std::vector<DetectionRow> detection_rates(const std::vector<ReplicationResult>& reps,
                                          const std::vector<int>& targets,
                                          const std::vector<MethodId>& methods) {
  std::vector<double> mean_coef(targets.size(), 0.0);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    int count = 0;
    for (const auto& rep : reps) {
      if (t < rep.target_coefficients.size() && std::isfinite(rep.target_coefficients[t])) {
        mean_coef[t] += rep.target_coefficients[t];
        ++count;
      }
    }
    mean_coef[t] = count > 0 ? mean_coef[t] / count : kNaN;
  }

  std::vector<DetectionRow> rows;
  for (MethodId id : methods) {
    for (std::size_t t = 0; t < targets.size(); ++t) {
      DetectionRow row;
      row.method = id;
      row.target = static_cast<int>(t) + 1;
      row.variable = targets[t];
      row.mean_coefficient = mean_coef[t];
      int hits = 0;
      for (const auto& rep : reps) {
        for (const auto& m : rep.methods) {
          if (m.method != id || !m.ok) continue;
          ++row.replications;
          hits += std::binary_search(m.validated.begin(), m.validated.end(), targets[t]) ? 1 : 0;
        }
      }
      row.rate = row.replications > 0 ? static_cast<double>(hits) / row.replications : kNaN;
      rows.push_back(row);
    }
  }
  return rows;
}

int ExperimentResult::failed_cells() const {
  int failed = 0;
  for (const auto& rep : replications) {
    for (const auto& m : rep.methods) failed += m.ok ? 0 : 1;
  }
  return failed;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (options.threads > 0) set_thread_count(options.threads);
  ExperimentResult result;
  result.started = utc_now();
  result.threads = thread_count();
  const auto t0 = std::chrono::steady_clock::now();
  result.experiment = prepare_experiment(config, Exec::parallel);

  const int reps = config.replications;
  result.replications.resize(static_cast<std::size_t>(reps));
  int finished = 0;
  for_each_index(reps, Exec::parallel, [&](int r) {
    result.replications[static_cast<std::size_t>(r)] =
        run_replication(result.experiment, r, Exec::serial);
    if (options.progress) {
      int failed = 0;
      for (const auto& m : result.replications[static_cast<std::size_t>(r)].methods) {
        failed += m.ok ? 0 : 1;
      }
#pragma omp critical(varsel_progress)
      {
        ++finished;
        options.progress("replication " + std::to_string(r + 1) + " done (" +
                         std::to_string(finished) + "/" + std::to_string(reps) +
                         (failed > 0 ? ", " + std::to_string(failed) + " failed cells" : "") +
                         ")");
      }
    }
  });

  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.finished = utc_now();
  return result;
}

void write_scorecards_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  auto out = open_output(path);
  out << "replication,method,definition,status,selected,validated,tp,fp,fn,f2,"
         "surrogate_pool,error\n";
  for (const auto& rep : result.replications) {
    for (const auto& m : rep.methods) {
      for (const bool strict : {true, false}) {
        std::vector<std::string> f{std::to_string(rep.replication + 1),
                                   std::string(method_name(m.method)),
                                   strict ? "strict" : "relaxed",
                                   m.ok ? "ok" : "failed"};
        if (m.ok) {
          const Counts& c = strict ? m.score.strict : m.score.relaxed;
          f.insert(f.end(), {std::to_string(m.selected.size()), std::to_string(m.validated.size()),
                             std::to_string(c.tp), std::to_string(c.fp), std::to_string(c.fn),
                             fmt(c.f2), std::to_string(m.score.surrogate_pool), ""});
        } else {
          f.insert(f.end(), {"", "", "", "", "", "", "", m.error});
        }
        out << csv::join_record(f) << '\n';
      }
    }
  }
}

void write_summary_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  auto out = open_output(path);
  out << "method,family,replications,failed,mean_selected,mean_validated,"
         "tp_strict,fp_strict,fn_strict,f2_strict,tp_relaxed,fp_relaxed,fn_relaxed,"
         "f2_relaxed,best_f2_strict,best_f2_relaxed\n";
  const auto& config = result.experiment.config;
  for (const auto& s : aggregate(result.replications, config.methods)) {
    // A method with no successful cell has no means to report.
    const auto num = [&](double v) { return s.replications > 0 ? fmt(v) : std::string(); };
    out << csv::join_record({std::string(method_name(s.method)),
                             std::string(to_string(config.family)),
                             std::to_string(s.replications), std::to_string(s.failed),
                             num(s.mean_selected), num(s.mean_validated), num(s.strict.tp),
                             num(s.strict.fp), num(s.strict.fn), num(s.strict.f2),
                             num(s.relaxed.tp), num(s.relaxed.fp), num(s.relaxed.fn),
                             num(s.relaxed.f2), s.best_f2_strict ? "1" : "0",
                             s.best_f2_relaxed ? "1" : "0"})
        << '\n';
  }
}

void write_detection_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  auto out = open_output(path);
  out << "method,target,variable,name,true_effect,rate,mean_univariable_coefficient,"
         "replications\n";
  const auto& e = result.experiment;
  for (const auto& row : detection_rates(result.replications, e.design.targets, e.config.methods)) {
    out << csv::join_record({std::string(method_name(row.method)),
                             "X" + std::to_string(row.target), std::to_string(row.variable),
                             e.covariates.names[static_cast<std::size_t>(row.variable)],
                             fmt(e.design.effect), fmt(row.rate), fmt(row.mean_coefficient),
                             std::to_string(row.replications)})
        << '\n';
  }
}

void write_audit_jsonl(const std::filesystem::path& path, const ExperimentResult& result) {
  auto out = open_output(path);
  for (const auto& rep : result.replications) {
    for (const auto& m : rep.methods) {
      nlohmann::json line = {{"replication", rep.replication + 1},
                             {"seed", rep.seed},
                             {"method", method_name(m.method)},
                             {"status", m.ok ? "ok" : "failed"},
                             {"discovery_rows", rep.discovery_rows},
                             {"validation_rows", rep.validation_rows},
                             {"selected", m.selected},
                             {"validated", m.validated},
                             {"details", m.audit}};
      if (!m.ok) line["error"] = m.error;
      out << line.dump() << '\n';
    }
  }
}

void write_run_meta(const std::filesystem::path& path, const ExperimentResult& result) {
  const auto& e = result.experiment;
  nlohmann::json targets = nlohmann::json::array();
  for (std::size_t t = 0; t < e.design.targets.size(); ++t) {
    const int v = e.design.targets[t];
    const bool high = std::binary_search(e.high_pool.begin(), e.high_pool.end(), v);
    const bool low = std::binary_search(e.low_pool.begin(), e.low_pool.end(), v);
    targets.push_back({{"label", "X" + std::to_string(t + 1)},
                       {"column", v},
                       {"name", e.covariates.names[static_cast<std::size_t>(v)]},
                       {"pool", high ? "high" : (low ? "low" : "explicit")}});
  }
  nlohmann::json surrogate_names = nlohmann::json::array();
  for (int s : e.surrogates) surrogate_names.push_back(e.covariates.names[static_cast<std::size_t>(s)]);

  nlohmann::json meta = {
      {"schema_version", kSchemaVersion},
      {"config_hash", config_hash(e.config)},
      {"config", to_json(e.config)},
      {"seed", e.config.seed},
      {"methods", to_json(e.config)["methods"]},
      {"family", to_string(e.config.family)},
      {"n", e.covariates.rows()},
      {"p", e.covariates.cols()},
      {"effect", e.design.effect},
      {"calibration_n", e.calibration_n},
      {"targets", targets},
      {"surrogates", surrogate_names},
      {"high_pool_size", e.high_pool.size()},
      {"low_pool_size", e.low_pool.size()},
      {"dropped_all_missing", e.preprocess.all_missing},
      {"dropped_zero_variance", e.preprocess.zero_variance},
      {"replications", e.config.replications},
      {"failed_cells", result.failed_cells()},
      {"threads", result.threads},
      {"started", result.started},
      {"finished", result.finished},
      {"elapsed_seconds", result.seconds},
      {"outputs", {kScorecardsFile, kSummaryFile, kDetectionFile, kAuditFile}},
  };
  if (e.correlation_groups) meta["correlation_groups"] = e.correlation_groups->count;
  if (e.bootstrap_groups) meta["bootstrap_groups"] = e.bootstrap_groups->count;
  auto out = open_output(path);
  out << meta.dump(2) << '\n';
}

void write_outputs(const std::filesystem::path& dir, const ExperimentResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  write_scorecards_csv(dir / kScorecardsFile, result);
  write_summary_csv(dir / kSummaryFile, result);
  write_detection_csv(dir / kDetectionFile, result);
  write_audit_jsonl(dir / kAuditFile, result);
  write_run_meta(dir / kMetaFile, result);
}

}  // namespace varsel::bench
