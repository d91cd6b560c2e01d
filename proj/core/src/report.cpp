#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "glomseg/pipeline.hpp"

namespace glomseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Minimal self-contained SVG line chart: one polyline per series over integer
// epochs, y in [0, 1].
struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;  // (epoch, score)
};

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<Series>& series, int max_epoch) {
  const int width = 640, height = 420;
  const int ml = 50, mr = 160, mt = 40, mb = 40;
  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;
  auto sx = [&](double epoch) { return ml + plot_w * (epoch - 1) / std::max(1, max_epoch - 1); };
  auto sy = [&](double v) { return mt + plot_h * (1.0 - v); };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write chart: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << title
      << "</text>\n";
  // axes and horizontal grid
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    out << "<line x1=\"" << ml << "\" y1=\"" << sy(v) << "\" x2=\"" << (ml + plot_w) << "\" y2=\""
        << sy(v) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << (ml - 8) << "\" y=\"" << (sy(v) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << v
        << "</text>\n";
  }
  for (int e = 1; e <= max_epoch; ++e) {
    out << "<text x=\"" << sx(e) << "\" y=\"" << (mt + plot_h + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << e
        << "</text>\n";
  }
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << (mt + plot_h)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << (mt + plot_h) << "\" x2=\"" << (ml + plot_w)
      << "\" y2=\"" << (mt + plot_h) << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (ml + plot_w / 2) << "\" y=\"" << (height - 8)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">epoch</text>\n";

  int legend_y = mt + 10;
  for (const Series& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [e, v] : s.points) out << sx(e) << "," << sy(std::clamp(v, 0.0, 1.0)) << " ";
    out << "\"/>\n";
    out << "<line x1=\"" << (ml + plot_w + 12) << "\" y1=\"" << legend_y << "\" x2=\""
        << (ml + plot_w + 34) << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << (ml + plot_w + 40) << "\" y=\"" << (legend_y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    legend_y += 18;
  }
  out << "</svg>\n";
}

const char* kPixelColors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#17becf"};
const char* kObjectColors[] = {"#ff7f0e", "#d62728", "#8c564b", "#e377c2"};

}  // namespace

bool emit_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
  if (run_dirs.empty()) throw std::invalid_argument("emit_report: no run directories given");
  fs::create_directories(out_dir);

  bool all_ok = true;
  std::vector<std::pair<std::string, ExperimentSummary>> runs;  // (dir, summary)
  for (const std::string& dir : run_dirs) {
    const fs::path summary_path = fs::path(dir) / "summary.json";
    if (!fs::exists(summary_path)) {
      std::cerr << "missing summary.json in " << dir << ", skipping\n";
      all_ok = false;
      continue;
    }
    runs.emplace_back(dir, load_summary(summary_path.string()));
  }

  // Cross-run CSV; numeric cells reuse the JSON dump of each value so they
  // match summary.json exactly.
  std::ofstream csv(fs::path(out_dir) / "report.csv");
  if (!csv) throw std::runtime_error("cannot write report.csv");
  csv << "setting,repetition,epoch,F,P,R,F_o,P_o,R_o\n";
  std::map<std::string, int> repetition_of_setting;
  std::map<std::string, std::vector<std::pair<int, const ExperimentSummary*>>> by_setting;
  for (const auto& [dir, summary] : runs) {
    const int rep = ++repetition_of_setting[summary.setting];
    by_setting[summary.setting].emplace_back(rep, &summary);
    for (const EpochScores& es : summary.per_epoch) {
      csv << summary.setting << "," << rep << "," << es.epoch << "," << json(es.pixel.f1).dump()
          << "," << json(es.pixel.precision).dump() << "," << json(es.pixel.recall).dump() << ","
          << json(es.object.f1).dump() << "," << json(es.object.precision).dump() << ","
          << json(es.object.recall).dump() << "\n";
    }
  }
  csv.flush();

  // One SVG per setting: pixel and object F1 curves per repetition.
  for (const auto& [setting, entries] : by_setting) {
    std::vector<Series> series;
    int max_epoch = 1;
    for (const auto& [rep, summary] : entries) {
      Series pixel, object;
      pixel.label = "F rep" + std::to_string(rep);
      pixel.color = kPixelColors[(rep - 1) % 4];
      object.label = "F_o rep" + std::to_string(rep);
      object.color = kObjectColors[(rep - 1) % 4];
      for (const EpochScores& es : summary->per_epoch) {
        pixel.points.emplace_back(es.epoch, es.pixel.f1);
        object.points.emplace_back(es.epoch, es.object.f1);
        max_epoch = std::max(max_epoch, es.epoch);
      }
      series.push_back(std::move(pixel));
      series.push_back(std::move(object));
    }
    write_svg_chart((fs::path(out_dir) / ("f1_curves_" + setting + ".svg")).string(),
                    "F1 vs epoch (" + setting + ")", series, max_epoch);
  }
  return all_ok;
}

}  // namespace glomseg
