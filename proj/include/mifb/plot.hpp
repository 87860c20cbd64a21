#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mifb {

/// One polyline of a convergence plot. Points are (iteration, value) with
/// value plotted on a log axis; an optional marker highlights the
/// identification iteration.
struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::string color{"#1f77b4"};
  bool dashed{false};
  double marker_x{-1};  // < 0: no marker
  double marker_y{0};
};

struct PlotStyle {
  std::string title;
  std::string x_label{"iteration k"};
  std::string y_label;
  int width{860};
  int height{540};
};

/// Write a self-contained SVG line plot with a log10 y axis. Non-positive
/// values are dropped with a warning on stderr. Throws InvalidParameterError
/// when no series has a plottable point.
void render_plot(const std::vector<PlotSeries>& series, const PlotStyle& style,
                 const std::string& path);

}  // namespace mifb
