#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "varsel/bench/config.hpp"
#include "varsel/bench/experiment.hpp"
#include "varsel/bench/report.hpp"
#include "varsel/common/error.hpp"
#include "varsel/datagen/csv_matrix.hpp"
#include "varsel/datagen/simulation.hpp"
#include "varsel/datagen/synthetic.hpp"

namespace bench = varsel::bench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;
constexpr int kExitIo = 4;

struct Overrides {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::string family;
  std::string methods;
  int threads = 0;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bench::ExperimentConfig load_with_overrides(const Overrides& o) {
  auto config = bench::load_config(o.config);
  if (o.seed) config.seed = *o.seed;
  if (o.replications) config.replications = *o.replications;
  if (!o.family.empty()) {
    try {
      config.family = varsel::parse_family(o.family);
    } catch (const varsel::InvalidArgument& e) {
      throw varsel::ConfigError(e.what());
    }
  }
  if (!o.methods.empty()) {
    config.methods.clear();
    for (const auto& name : split_list(o.methods)) config.methods.push_back(bench::parse_method(name));
  }
  if (!o.out_dir.empty()) config.output_dir = o.out_dir;
  config.validate();
  return config;
}

int cmd_simulate(const Overrides& o) {
  const auto config = load_with_overrides(o);
  const auto e = bench::prepare_experiment(config);
  std::filesystem::create_directories(config.output_dir);
  const auto covariates_path = config.output_dir / "covariates.csv";
  if (config.synthetic) {
    varsel::write_csv_matrix(covariates_path, varsel::generate_synthetic_covariates(*config.synthetic));
  } else {
    varsel::write_csv_matrix(covariates_path, varsel::load_csv_matrix(config.csv));
  }

  const auto max_corr = varsel::max_abs_offdiagonal(e.spearman);
  nlohmann::json targets = nlohmann::json::array();
  std::cout << "target  column  name        max |rho|  pool\n";
  for (std::size_t t = 0; t < e.design.targets.size(); ++t) {
    const int v = e.design.targets[t];
    const auto& name = e.covariates.names[static_cast<std::size_t>(v)];
    const bool high = std::binary_search(e.high_pool.begin(), e.high_pool.end(), v);
    const bool low = std::binary_search(e.low_pool.begin(), e.low_pool.end(), v);
    const char* pool = high ? "high" : (low ? "low" : "explicit");
    targets.push_back({{"label", "X" + std::to_string(t + 1)},
                       {"column", v},
                       {"name", name},
                       {"max_abs_spearman", max_corr[static_cast<std::size_t>(v)]},
                       {"pool", pool}});
    std::printf("X%-6zu  %6d  %-10s  %9.4f  %s\n", t + 1, v, name.c_str(),
                max_corr[static_cast<std::size_t>(v)], pool);
  }
  nlohmann::json design = {{"schema_version", bench::kSchemaVersion},
                           {"family", varsel::to_string(config.family)},
                           {"effect", e.design.effect},
                           {"calibration_n", e.calibration_n},
                           {"targets", targets},
                           {"high_pool", e.high_pool},
                           {"low_pool", e.low_pool},
                           {"surrogates", e.surrogates},
                           {"dropped_all_missing", e.preprocess.all_missing},
                           {"dropped_zero_variance", e.preprocess.zero_variance}};
  std::ofstream out(config.output_dir / "design.json");
  if (!out) throw varsel::IoError("cannot write design.json");
  out << design.dump(2) << '\n';
  std::cout << "effect " << e.design.effect << "; wrote " << covariates_path.string() << " and "
            << (config.output_dir / "design.json").string() << '\n';
  return kExitOk;
}

int cmd_run(const Overrides& o) {
  const auto config = load_with_overrides(o);
  bench::RunOptions options;
  options.threads = o.threads;
  options.progress = [](const std::string& line) { std::cout << line << std::endl; };
  const auto result = bench::run_experiment(config, options);
  bench::write_outputs(config.output_dir, result);
  const auto report = bench::render_report(config.output_dir);
  std::cout << '\n' << report.summary_table;
  const int failed = result.failed_cells();
  std::cout << "\nwrote results to " << config.output_dir.string() << " in "
            << result.seconds << " s on " << result.threads << " thread(s)";
  if (failed > 0) std::cout << "; " << failed << " failed cells (see audit.jsonl)";
  std::cout << '\n';
  return failed > 0 ? kExitPartial : kExitOk;
}

int cmd_report(const std::string& results, const std::string& out_dir) {
  const auto report = bench::render_report(results);
  bench::write_report(out_dir.empty() ? results : out_dir, report);
  std::cout << report.summary_table << '\n' << report.detection_table;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable selection benchmark harness"};
  app.require_subcommand(1);

  Overrides sim;
  auto* simulate = app.add_subcommand("simulate", "Generate covariates and the target design");
  simulate->add_option("--config", sim.config, "Experiment config (JSON)")->required();
  simulate->add_option("--out-dir", sim.out_dir, "Output directory");
  simulate->add_option("--seed", sim.seed, "Master seed (overrides config)");
  simulate->add_option("--family", sim.family, "binary or continuous");

  Overrides run;
  auto* run_cmd = app.add_subcommand("run", "Run the simulation experiment");
  run_cmd->add_option("--config", run.config, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory");
  run_cmd->add_option("--seed", run.seed, "Master seed (overrides config)");
  run_cmd->add_option("--threads", run.threads, "Worker threads (0: OpenMP default)")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--methods", run.methods, "Comma-separated method identifiers");
  run_cmd->add_option("--family", run.family, "binary or continuous");
  run_cmd->add_option("--replications", run.replications, "Replication count");

  std::string results_dir;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Render tables and plots from a results directory");
  report->add_option("results", results_dir, "Results directory")->required();
  report->add_option("--out-dir", report_out, "Where to write report files (default: results)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*run_cmd) return cmd_run(run);
    return cmd_report(results_dir, report_out);
  } catch (const varsel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const varsel::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const varsel::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
