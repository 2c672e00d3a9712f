#include "varsel/bench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "varsel/bench/config.hpp"
#include "varsel/bench/experiment.hpp"
#include "varsel/common/csv.hpp"
#include "varsel/common/error.hpp"

namespace varsel::bench {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing input file '" + path.string() + "'");
  return in;
}

double number(const std::string& text) {
  if (text.empty()) return std::nan("");
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + text + "'");
  }
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Left-aligns the first column and right-aligns the rest.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      const std::string pad(width[c] - r[c].size(), ' ');
      line += c == 0 ? r[c] + pad : "  " + pad + r[c];
    }
    out << line << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c == 0 ? 0 : 2);
      out << std::string(total, '-') << '\n';
    }
  }
  return out.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string f2_chart(const CsvTable& summary) {
  const int bar = 14;
  const int group = 2 * bar + 10;
  const int label_w = 130;
  const int plot_w = 400;
  const int height = 40 + group * static_cast<int>(summary.rows.size()) + 30;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << label_w + plot_w + 80
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"" << label_w << "\" y=\"16\" font-size=\"13\">Mean F2 per method</text>\n";
  svg << "<rect x=\"" << label_w << "\" y=\"22\" width=\"10\" height=\"10\" fill=\"#4c72b0\"/>"
      << "<text x=\"" << label_w + 14 << "\" y=\"31\">strict</text>\n";
  svg << "<rect x=\"" << label_w + 60 << "\" y=\"22\" width=\"10\" height=\"10\" fill=\"#dd8452\"/>"
      << "<text x=\"" << label_w + 74 << "\" y=\"31\">relaxed</text>\n";
  int y = 40;
  for (const auto& row : summary.rows) {
    svg << "<text x=\"" << label_w - 6 << "\" y=\"" << y + bar + 4
        << "\" text-anchor=\"end\">" << xml_escape(row.at("method")) << "</text>\n";
    const std::pair<const char*, const char*> series[] = {{"f2_strict", "#4c72b0"},
                                                          {"f2_relaxed", "#dd8452"}};
    int offset = 0;
    for (const auto& [column, colour] : series) {
      const double v = number(row.at(column));
      const double w = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0) * plot_w;
      svg << "<rect x=\"" << label_w << "\" y=\"" << y + offset << "\" width=\"" << fixed(w, 1)
          << "\" height=\"" << bar << "\" fill=\"" << colour << "\"/>"
          << "<text x=\"" << label_w + static_cast<int>(w) + 4 << "\" y=\"" << y + offset + bar - 3
          << "\">" << fixed(v, 3) << "</text>\n";
      offset += bar;
    }
    y += group;
  }
  svg << "<line x1=\"" << label_w << "\" y1=\"38\" x2=\"" << label_w << "\" y2=\"" << y
      << "\" stroke=\"black\"/>\n</svg>\n";
  return svg.str();
}

std::string heatmap(const std::vector<std::string>& methods,
                    const std::vector<std::string>& targets,
                    const std::map<std::pair<std::string, std::string>, double>& rate) {
  const int cell_w = 72;
  const int cell_h = 22;
  const int left = 70;
  const int top = 110;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << left + cell_w * static_cast<int>(methods.size()) + 20 << "\" height=\""
      << top + cell_h * static_cast<int>(targets.size()) + 20
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"" << left << "\" y=\"16\" font-size=\"13\">Detection rate</text>\n";
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const int x = left + cell_w * static_cast<int>(m) + cell_w / 2;
    svg << "<text transform=\"translate(" << x << "," << top - 6
        << ") rotate(-45)\">" << xml_escape(methods[m]) << "</text>\n";
  }
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const int y = top + cell_h * static_cast<int>(t);
    svg << "<text x=\"" << left - 6 << "\" y=\"" << y + 15 << "\" text-anchor=\"end\">"
        << xml_escape(targets[t]) << "</text>\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto it = rate.find({methods[m], targets[t]});
      const double v = it == rate.end() ? std::nan("") : it->second;
      const int shade = std::isnan(v) ? 230 : 255 - static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 200));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      const int x = left + cell_w * static_cast<int>(m);
      svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\""
          << cell_h << "\" fill=\"" << (std::isnan(v) ? "#e6e6e6" : fill)
          << "\" stroke=\"white\"/><text x=\"" << x + cell_w / 2 << "\" y=\"" << y + 15
          << "\" text-anchor=\"middle\">" << fixed(v, 2) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

CsvTable read_csv_table(const std::filesystem::path& path) {
  auto in = open_input(path);
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = csv::split_record(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    std::map<std::string, std::string> row;
    for (std::size_t c = 0; c < fields.size(); ++c) row[table.header[c]] = std::move(fields[c]);
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ParseError(path.string() + ": empty file");
  return table;
}

Report render_report(const std::filesystem::path& results_dir) {
  nlohmann::json meta;
  {
    auto in = open_input(results_dir / kMetaFile);
    try {
      meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string(kMetaFile) + ": " + e.what());
    }
  }
  const int version = meta.value("schema_version", -1);
  if (version != kSchemaVersion) {
    throw ConfigError(std::string(kMetaFile) + " has schema version " + std::to_string(version) +
                      "; this build reads version " + std::to_string(kSchemaVersion));
  }
  const CsvTable summary = read_csv_table(results_dir / kSummaryFile);
  const CsvTable detection = read_csv_table(results_dir / kDetectionFile);

  Report report;
  std::ostringstream head;
  head << "family " << meta.value("family", "?") << ", n " << meta.value("n", 0) << ", p "
       << meta.value("p", 0) << ", replications " << meta.value("replications", 0)
       << ", effect " << fixed(meta.value("effect", 0.0), 4) << "\n\n";

  std::vector<std::vector<std::string>> rows{{"Method", "TP", "FP", "FN", "F2", "TP*", "FP*",
                                              "FN*", "F2*", "Reps", "Failed"}};
  for (const auto& r : summary.rows) {
    const auto mark = [&](const char* flag) { return r.at(flag) == "1" ? " #" : "  "; };
    rows.push_back({r.at("method"), fixed(number(r.at("tp_strict")), 2),
                    fixed(number(r.at("fp_strict")), 2), fixed(number(r.at("fn_strict")), 2),
                    fixed(number(r.at("f2_strict")), 3) + mark("best_f2_strict"),
                    fixed(number(r.at("tp_relaxed")), 2), fixed(number(r.at("fp_relaxed")), 2),
                    fixed(number(r.at("fn_relaxed")), 2),
                    fixed(number(r.at("f2_relaxed")), 3) + mark("best_f2_relaxed"),
                    r.at("replications"), r.at("failed")});
  }
  report.summary_table = head.str() + render_table(rows) +
                         "\n* relaxed definition (surrogates count as hits); # best F2 in column\n";

  std::vector<std::string> methods;
  std::vector<std::string> targets;
  std::map<std::string, std::string> target_info;
  std::map<std::pair<std::string, std::string>, double> rate;
  for (const auto& r : detection.rows) {
    const auto& m = r.at("method");
    const auto& t = r.at("target");
    if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
    if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
      targets.push_back(t);
      target_info[t] = r.at("name") + "|" + fixed(number(r.at("mean_univariable_coefficient")), 3) +
                       "|" + fixed(number(r.at("true_effect")), 3);
    }
    rate[{m, t}] = number(r.at("rate"));
  }
  std::vector<std::vector<std::string>> drows{{"Target", "Column", "True", "Mean coef"}};
  drows.front().insert(drows.front().end(), methods.begin(), methods.end());
  for (const auto& t : targets) {
    std::vector<std::string> parts;
    std::stringstream ss(target_info[t]);
    for (std::string part; std::getline(ss, part, '|');) parts.push_back(part);
    std::vector<std::string> row{t, parts.at(0), parts.at(2), parts.at(1)};
    for (const auto& m : methods) {
      const auto it = rate.find({m, t});
      row.push_back(it == rate.end() ? "NA" : fixed(it->second, 3));
    }
    drows.push_back(std::move(row));
  }
  report.detection_table = render_table(drows);
  report.f2_chart_svg = f2_chart(summary);
  report.heatmap_svg = heatmap(methods, targets, rate);
  return report;
}

void write_report(const std::filesystem::path& out_dir, const Report& report) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  const auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write '" + (out_dir / name).string() + "'");
    out << text;
  };
  write("report.txt", "Selection summary\n\n" + report.summary_table +
                          "\nDetection rates per target\n\n" + report.detection_table);
  write("f2_scores.svg", report.f2_chart_svg);
  write("detection_heatmap.svg", report.heatmap_svg);
}

}  // namespace varsel::bench
