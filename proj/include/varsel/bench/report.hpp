#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace varsel::bench {

/// A CSV file read back as rows keyed by header name.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
};

/// Throws IoError naming the file when it is absent, ParseError on a ragged row.
CsvTable read_csv_table(const std::filesystem::path& path);

struct Report {
  std::string summary_table;    ///< per method: TP / FP / FN / F2, both definitions
  std::string detection_table;  ///< per target: mean coefficient and rate per method
  std::string f2_chart_svg;     ///< grouped bar chart of mean F2
  std::string heatmap_svg;      ///< detection rate, targets x methods
};

/// Renders from summary.csv, detection.csv and run_meta.json in `results_dir`.
/// Throws IoError naming a missing input and ConfigError when run_meta.json
/// carries a different schema version.
Report render_report(const std::filesystem::path& results_dir);

/// Writes report.txt, f2_scores.svg and detection_heatmap.svg into `out_dir`.
void write_report(const std::filesystem::path& out_dir, const Report& report);

}  // namespace varsel::bench
