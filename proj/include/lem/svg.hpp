#pragma once

#include <string>
#include <vector>

namespace lem {

// Static SVG renderers for the analytics outputs. Grid cells with NaN are
// left unpainted.
void write_heatmap_svg(const std::string& path, const std::vector<double>& grid101,
                       const std::string& title);

// One polyline per series, values expected in [-1, 1] or [0, 1].
struct SvgSeries {
  std::string label;
  std::string color;  // e.g. "#1f77b4"
  std::vector<double> values;
};

void write_series_svg(const std::string& path, const std::vector<SvgSeries>& series,
                      double y_min, double y_max, const std::string& title);

}  // namespace lem
