#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tomsc::exp {

struct PlotSpec {
  std::string title;
  std::string x_column;
  std::string y_column;
  /// Rows are grouped into one line per distinct value; empty means a single line.
  std::string series_column;
  /// Optional half-width of an error bar per point.
  std::string error_column;
  std::string x_label;
  std::string y_label;
};

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  double err = 0.0;
};

struct PlotSeries {
  std::string name;
  std::vector<PlotPoint> points;  ///< sorted by x
};

/// Reads the columns named in `spec`; series keep first-appearance order.
std::vector<PlotSeries> read_plot_csv(const std::filesystem::path& csv, const PlotSpec& spec);

/// Renders one polyline per series. Axis ranges extend 5% past the data
/// (error bars included) on each side.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec);

void emit_plot(const std::filesystem::path& csv, const PlotSpec& spec, const std::filesystem::path& svg);

}  // namespace tomsc::exp
