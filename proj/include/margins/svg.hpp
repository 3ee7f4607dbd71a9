#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "margins/numeric.hpp"

namespace margins {

struct ChartSeries {
  std::string label;
  std::string color;
  // gaps (undefined values) are encoded by splitting into separate segments
  std::vector<std::vector<std::pair<double, double>>> segments;
};

inline const char* chart_color(std::size_t index) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[index % (sizeof(palette) / sizeof(palette[0]))];
}

// Minimal multi-series line chart. Convenience artifact only: nothing in the
// test surface depends on these bytes.
inline std::string line_chart_svg(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<ChartSeries>& series) {
  const double width = 640.0, height = 420.0;
  const double ml = 60.0, mr = 160.0, mt = 40.0, mb = 50.0;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& seg : s.segments) {
      for (const auto& [x, y] : seg) {
        if (first) {
          x_lo = x_hi = x;
          y_lo = y_hi = y;
          first = false;
        } else {
          x_lo = std::min(x_lo, x);
          x_hi = std::max(x_hi, x);
          y_lo = std::min(y_lo, y);
          y_hi = std::max(y_hi, y);
        }
      }
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  auto px = [&](double x) { return ml + pw * (x - x_lo) / (x_hi - x_lo); };
  auto py = [&](double y) { return mt + ph * (1.0 - (y - y_lo) / (y_hi - y_lo)); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
         "\" height=\"" + format_double(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto text = [&](double x, double y, const std::string& s, const char* anchor, int size) {
    svg += "<text x=\"" + format_double(x) + "\" y=\"" + format_double(y) +
           "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(size) +
           "\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
  };
  svg += "<rect x=\"" + format_double(ml) + "\" y=\"" + format_double(mt) + "\" width=\"" +
         format_double(pw) + "\" height=\"" + format_double(ph) +
         "\" fill=\"none\" stroke=\"#444444\"/>\n";
  text(width / 2.0 - mr / 2.0, 24.0, title, "middle", 14);
  text(ml + pw / 2.0, height - 12.0, x_label, "middle", 12);
  text(16.0, mt + ph / 2.0, y_label, "middle", 12);
  text(ml, mt + ph + 16.0, format_double(x_lo), "middle", 10);
  text(ml + pw, mt + ph + 16.0, format_double(x_hi), "middle", 10);
  text(ml - 6.0, mt + ph + 4.0, format_double(y_lo), "end", 10);
  text(ml - 6.0, mt + 4.0, format_double(y_hi), "end", 10);

  for (const auto& s : series) {
    for (const auto& seg : s.segments) {
      if (seg.empty()) continue;
      if (seg.size() == 1) {
        svg += "<circle cx=\"" + format_double(px(seg[0].first)) + "\" cy=\"" +
               format_double(py(seg[0].second)) + "\" r=\"2\" fill=\"" + s.color + "\"/>\n";
        continue;
      }
      svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : seg)
        svg += format_double(px(x)) + "," + format_double(py(y)) + " ";
      svg += "\"/>\n";
    }
  }

  double ly = mt + 10.0;
  for (const auto& s : series) {
    svg += "<line x1=\"" + format_double(ml + pw + 10.0) + "\" y1=\"" + format_double(ly) +
           "\" x2=\"" + format_double(ml + pw + 30.0) + "\" y2=\"" + format_double(ly) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    text(ml + pw + 36.0, ly + 4.0, s.label, "start", 11);
    ly += 18.0;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace margins
