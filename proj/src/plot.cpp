#include "mifb/plot.hpp"

#include "mifb/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace mifb {

namespace {

struct Extent {
  double lo{std::numeric_limits<double>::infinity()};
  double hi{-std::numeric_limits<double>::infinity()};
  void grow(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void render_plot(const std::vector<PlotSeries>& series, const PlotStyle& style,
                 const std::string& path) {
  if (series.empty()) throw InvalidParameterError("render_plot: no series");

  // Log-domain filtering: keep (x, log10 y) for y > 0.
  std::vector<std::vector<std::pair<double, double>>> curves;
  Extent xe, ye;
  bool dropped = false;
  for (const auto& s : series) {
    std::vector<std::pair<double, double>> curve;
    for (const auto& [x, y] : s.points) {
      if (!(y > 0) || !std::isfinite(y)) {
        dropped = true;
        continue;
      }
      const double ly = std::log10(y);
      curve.emplace_back(x, ly);
      xe.grow(x);
      ye.grow(ly);
    }
    curves.push_back(std::move(curve));
  }
  if (dropped) {
    std::fprintf(stderr, "render_plot: dropped non-positive values from log plot\n");
  }
  if (!(xe.lo <= xe.hi)) throw InvalidParameterError("render_plot: no plottable points");
  if (xe.hi == xe.lo) xe.hi = xe.lo + 1;
  if (ye.hi == ye.lo) ye.hi = ye.lo + 1;

  const double ml = 70, mr = 170, mt = 42, mb = 52;
  const double pw = style.width - ml - mr;
  const double ph = style.height - mt - mb;
  const auto px = [&](double x) { return ml + (x - xe.lo) / (xe.hi - xe.lo) * pw; };
  const auto py = [&](double ly) { return mt + (ye.hi - ly) / (ye.hi - ye.lo) * ph; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      style.width, style.height, style.width, style.height);
  svg += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", style.width,
                     style.height);
  svg += fmt::format(
      "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
      ml + pw / 2, escape_xml(style.title));

  // Axis frame.
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n", ml,
      mt, pw, ph);

  // y ticks at integer decades.
  const int lo_dec = static_cast<int>(std::ceil(ye.lo - 1e-9));
  const int hi_dec = static_cast<int>(std::floor(ye.hi + 1e-9));
  int dec_step = std::max(1, (hi_dec - lo_dec) / 8);
  for (int d = lo_dec; d <= hi_dec; d += dec_step) {
    const double y = py(d);
    svg += fmt::format(
        "<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", ml, y,
        ml + pw, y);
    svg += fmt::format(
        "<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">1e{}</text>\n", ml - 6, y + 4, d);
  }

  // x ticks: 6 evenly spaced round values.
  for (int i = 0; i <= 5; ++i) {
    const double x = xe.lo + (xe.hi - xe.lo) * i / 5.0;
    const double sx = px(x);
    svg += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{}\" stroke=\"#444\"/>\n", sx,
        mt + ph, sx, mt + ph + 5);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.0f}</text>\n", sx,
                       mt + ph + 18, x);
  }
  svg += fmt::format(
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", ml + pw / 2,
      style.height - 14, escape_xml(style.x_label));
  svg += fmt::format(
      "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
      mt + ph / 2, mt + ph / 2, escape_xml(style.y_label));

  // Curves.
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (curves[i].empty()) continue;
    std::string pts;
    for (const auto& [x, ly] : curves[i]) {
      pts += fmt::format("{:.2f},{:.2f} ", px(x), py(ly));
    }
    svg += fmt::format(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"{}/>\n", pts,
        series[i].color, series[i].dashed ? " stroke-dasharray=\"7,4\"" : "");
    if (series[i].marker_x >= 0 && series[i].marker_y > 0) {
      svg += fmt::format(
          "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4.5\" fill=\"#2ca02c\" stroke=\"#155d15\"/>\n",
          px(series[i].marker_x), py(std::log10(series[i].marker_y)));
    }
  }

  // Legend.
  double ly_pos = mt + 10;
  for (const auto& s : series) {
    svg += fmt::format(
        "<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"{}\" "
        "stroke-width=\"1.6\"{}/>\n",
        ml + pw + 12, ly_pos, ml + pw + 38, ly_pos, s.color,
        s.dashed ? " stroke-dasharray=\"7,4\"" : "");
    svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\">{}</text>\n", ml + pw + 44, ly_pos + 4,
                       escape_xml(s.label));
    ly_pos += 18;
  }

  svg += "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("render_plot: cannot open " + path);
  out << svg;
}

}  // namespace mifb
