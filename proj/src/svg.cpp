#include "lem/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lem/analytics.hpp"
#include "lem/common.hpp"

namespace lem {

namespace {

// White -> red ramp.
std::string heat_color(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const int g = static_cast<int>(std::lround(255.0 * (1.0 - v)));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#ff%02x%02x", g, g);
  return buf;
}

}  // namespace

void write_heatmap_svg(const std::string& path, const std::vector<double>& grid101,
                       const std::string& title) {
  if (grid101.size() != static_cast<std::size_t>(kGridSize) * kGridSize) {
    throw Error("heatmap grid must be 101x101");
  }
  double max_v = 0.0;
  for (double v : grid101) {
    if (!std::isnan(v)) max_v = std::max(max_v, v);
  }
  if (max_v <= 0.0) max_v = 1.0;

  constexpr int cell = 6;
  constexpr int margin = 24;
  const int size = kGridSize * cell + 2 * margin;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write SVG: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\""
      << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">"
      << title << "</text>\n";
  char buf[160];
  for (int xi = 0; xi < kGridSize; ++xi) {
    for (int yi = 0; yi < kGridSize; ++yi) {
      const double v = grid101[static_cast<std::size_t>(xi) * kGridSize + yi];
      if (std::isnan(v)) continue;
      // x grows rightward, y upward (pitch orientation).
      const int px = margin + xi * cell;
      const int py = margin + (kGridSize - 1 - yi) * cell;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\"/>\n", px,
                    py, cell, cell, heat_color(v / max_v).c_str());
      out << buf;
    }
  }
  out << "</svg>\n";
}

void write_series_svg(const std::string& path, const std::vector<SvgSeries>& series,
                      double y_min, double y_max, const std::string& title) {
  if (y_max <= y_min) throw Error("empty y range for series SVG");
  std::size_t n = 0;
  for (const auto& s : series) n = std::max(n, s.values.size());
  if (n < 2) n = 2;

  constexpr int width = 900;
  constexpr int height = 300;
  constexpr int margin = 32;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write SVG: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">"
      << title << "</text>\n";

  const auto sx = [&](std::size_t i) {
    return margin + static_cast<double>(i) * (width - 2.0 * margin) /
                        static_cast<double>(n - 1);
  };
  const auto sy = [&](double v) {
    const double t = (v - y_min) / (y_max - y_min);
    return height - margin - t * (height - 2.0 * margin);
  };

  // Zero axis when it is inside the range.
  if (y_min < 0.0 && y_max > 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"#cccccc\"/>\n",
                  margin, sy(0.0), width - margin, sy(0.0));
    out << buf;
  }

  int label_y = 32;
  for (const auto& s : series) {
    if (s.values.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    char buf[48];
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", sx(i), sy(s.values[i]));
      out << buf;
    }
    out << "\"/>\n";
    out << "<text x=\"" << (width - margin - 120) << "\" y=\"" << label_y
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << s.color << "\">"
        << s.label << "</text>\n";
    label_y += 14;
  }
  out << "</svg>\n";
}

}  // namespace lem
