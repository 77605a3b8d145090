#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pkpiece/bench.hpp"

namespace pkp {

namespace {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // sorted by x
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;

void frame(std::ostringstream& svg, const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
  svg << "<text x=\"" << num(kLeft + (kWidth - kLeft - kRight) / 2) << "\" y=\"" << num(kHeight - 10)
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  svg << "<text transform=\"translate(16," << num(kTop + (kHeight - kTop - kBottom) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\"/>\n";
}

void y_axis(std::ostringstream& svg, double ymax) {
  const double plot_h = kHeight - kTop - kBottom;
  for (int i = 0; i <= 5; ++i) {
    const double v = ymax * i / 5.0;
    const double y = kHeight - kBottom - plot_h * i / 5.0;
    svg << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick(v)
        << "</text>\n";
  }
}

void legend(std::ostringstream& svg, const std::vector<std::string>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 10 + 20.0 * i;
    svg << "<rect x=\"" << kWidth - kRight + 15 << "\" y=\"" << num(y - 9) << "\" width=\"12\" height=\"12\" fill=\""
        << kPalette[i % 4] << "\"/>\n";
    svg << "<text x=\"" << kWidth - kRight + 32 << "\" y=\"" << num(y + 1) << "\">" << labels[i] << "</text>\n";
  }
}

double nice_max(double v) {
  if (!(v > 0.0)) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (v <= m * mag) return m * mag;
  return 10.0 * mag;
}

std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<Series>& series, std::optional<double> fixed_ymax) {
  std::ostringstream svg;
  frame(svg, title, xlabel, ylabel);
  double xmin = INFINITY, xmax = -INFINITY, ymax = 0.0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  if (xmax <= xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  ymax = fixed_ymax ? *fixed_ymax : nice_max(ymax);
  y_axis(svg, ymax);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + plot_w * (x - xmin) / (xmax - xmin); };
  const auto py = [&](double y) { return kHeight - kBottom - plot_h * y / ymax; };

  std::vector<double> xs;
  for (const auto& s : series)
    for (const auto& p : s.points) xs.push_back(p.first);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs)
    svg << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kHeight - kBottom + 16) << "\" text-anchor=\"middle\">"
        << tick(x) << "</text>\n";

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    labels.push_back(s.label);
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 4] << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k)
      svg << (k ? " " : "") << num(px(s.points[k].first)) << "," << num(py(s.points[k].second));
    svg << "\"/>\n";
    for (const auto& [x, y] : s.points)
      svg << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\"" << kPalette[i % 4]
          << "\"/>\n";
  }
  legend(svg, labels);
  svg << "</svg>\n";
  return svg.str();
}

// Grouped bars: one group per category, one bar per series.
std::string bar_chart(const std::string& title, const std::string& ylabel, const std::vector<std::string>& groups,
                      const std::vector<std::string>& series_labels, const std::vector<std::vector<double>>& values) {
  std::ostringstream svg;
  frame(svg, title, "", ylabel);
  double ymax = 0.0;
  for (const auto& row : values)
    for (double v : row) ymax = std::max(ymax, v);
  ymax = nice_max(ymax);
  y_axis(svg, ymax);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double group_w = plot_w / static_cast<double>(groups.size());
  const double bar_w = group_w * 0.7 / static_cast<double>(series_labels.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double gx = kLeft + group_w * g + group_w * 0.15;
    for (std::size_t s = 0; s < series_labels.size(); ++s) {
      const double h = plot_h * values[g][s] / ymax;
      svg << "<rect x=\"" << num(gx + bar_w * s) << "\" y=\"" << num(kHeight - kBottom - h) << "\" width=\""
          << num(bar_w) << "\" height=\"" << num(h) << "\" fill=\"" << kPalette[s % 4] << "\"/>\n";
    }
    svg << "<text x=\"" << num(kLeft + group_w * (g + 0.5)) << "\" y=\"" << num(kHeight - kBottom + 16)
        << "\" text-anchor=\"middle\">" << groups[g] << "</text>\n";
  }
  legend(svg, series_labels);
  svg << "</svg>\n";
  return svg.str();
}

struct Aggregate {
  double time_sum = 0.0;
  int runs = 0;
  int successes = 0;
};

// mode -> sweep value -> aggregate, for rows whose sweep names `parameter`.
std::map<std::string, std::map<double, Aggregate>> by_sweep(const std::vector<RunRecord>& records,
                                                           const std::string& parameter) {
  std::map<std::string, std::map<double, Aggregate>> out;
  const std::string prefix = parameter + "=";
  for (const auto& r : records) {
    if (r.sweep.rfind(prefix, 0) != 0) continue;
    double v = 0.0;
    try {
      v = std::stod(r.sweep.substr(prefix.size()));
    } catch (const std::exception&) {
      continue;
    }
    auto& a = out[to_string(r.mode)][v];
    a.time_sum += r.wall_time;
    ++a.runs;
    a.successes += r.success ? 1 : 0;
  }
  return out;
}

std::vector<Series> series_of(const std::map<std::string, std::map<double, Aggregate>>& data, bool success) {
  std::vector<Series> out;
  for (const auto& [mode, points] : data) {
    Series s{mode, {}};
    for (const auto& [x, a] : points)
      s.points.emplace_back(x, success ? static_cast<double>(a.successes) / a.runs : a.time_sum / a.runs);
    out.push_back(std::move(s));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const std::vector<RunRecord>& records,
                                               const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw IoError("cannot use output directory '" + out_dir.string() + "'");

  std::vector<std::filesystem::path> written;
  const auto csv = out_dir / "records.csv";
  write_records(csv, records);
  written.push_back(csv);
  if (records.empty()) return written;

  const auto emit = [&](const std::string& name, const std::string& svg) {
    const auto path = out_dir / name;
    write_file(path, svg);
    written.push_back(path);
  };

  // Mean states and cells per mode.
  std::map<std::string, std::pair<double, int>> states, cells;
  for (const auto& r : records) {
    auto& s = states[to_string(r.mode)];
    s.first += static_cast<double>(r.states);
    ++s.second;
    auto& c = cells[to_string(r.mode)];
    c.first += static_cast<double>(r.cells);
    ++c.second;
  }
  std::vector<std::string> modes;
  std::vector<std::vector<double>> values;
  for (const auto& [mode, acc] : states) {
    modes.push_back(mode);
    values.push_back({acc.first / acc.second, cells[mode].first / cells[mode].second});
  }
  emit("states_cells.svg", bar_chart("States and cells per run", "mean count", modes, {"states", "cells"}, values));

  struct Study {
    const char* parameter;
    const char* axis;
    const char* stem;
    bool success_chart;
  };
  const Study studies[] = {{"clutter", "movable objects", "clutter", true},
                           {"particles", "particle motions", "particles", true},
                           {"cell_size", "cell size (% of workspace)", "cell_size", false}};
  for (const auto& st : studies) {
    const auto data = by_sweep(records, st.parameter);
    if (data.empty()) continue;
    emit(std::string("time_vs_") + st.stem + ".svg",
         line_chart(std::string("Planning time vs ") + st.axis, st.axis, "mean wall time (s)", series_of(data, false),
                    std::nullopt));
    if (st.success_chart)
      emit(std::string("success_vs_") + st.stem + ".svg",
           line_chart(std::string("Success rate vs ") + st.axis, st.axis, "success rate", series_of(data, true), 1.0));
  }
  return written;
}

}  // namespace pkp
