// SPDX-License-Identifier: Apache-2.0
#include "tsgan/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tsgan/error.hpp"

namespace tsgan {
namespace {

constexpr double kLeft = 70.0, kRight = 20.0, kTop = 30.0, kBottom = 30.0;

std::string fmt(const char* pattern, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(std::span<const PlotPanel> panels, int width, int panel_height) {
  if (panels.empty()) throw DataError("nothing to plot");
  std::ostringstream svg;
  const int height = panel_height * static_cast<int>(panels.size());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    if (panel.series.empty()) throw DataError("panel '" + panel.title + "' has no series");
    double lo = INFINITY, hi = -INFINITY;
    std::size_t longest = 0;
    for (const auto& s : panel.series) {
      if (s.values.empty()) throw DataError("series '" + s.label + "' is empty");
      for (double v : s.values) {
        if (!std::isfinite(v)) throw DataError("series '" + s.label + "' has a non-finite value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      longest = std::max(longest, s.values.size());
    }
    if (hi - lo <= 0.0) {
      const double pad = std::max(std::abs(lo) * 0.05, 0.5);
      lo -= pad;
      hi += pad;
    }

    const double y0 = panel_height * static_cast<double>(p);
    const double plot_w = width - kLeft - kRight;
    const double plot_h = panel_height - kTop - kBottom;
    const double x_span = longest > 1 ? static_cast<double>(longest - 1) : 1.0;
    auto px = [&](std::size_t i) { return kLeft + plot_w * static_cast<double>(i) / x_span; };
    auto py = [&](double v) { return y0 + kTop + plot_h * (hi - v) / (hi - lo); };

    svg << "<g class=\"panel\">\n";
    svg << "<text x=\"" << kLeft << "\" y=\"" << fmt("%.2f", y0 + 18) << "\" font-weight=\"bold\">"
        << escape(panel.title) << "</text>\n";
    svg << "<line class=\"axis\" x1=\"" << kLeft << "\" y1=\"" << fmt("%.2f", y0 + kTop) << "\" x2=\"" << kLeft
        << "\" y2=\"" << fmt("%.2f", y0 + kTop + plot_h) << "\" stroke=\"black\"/>\n";
    svg << "<line class=\"axis\" x1=\"" << kLeft << "\" y1=\"" << fmt("%.2f", y0 + kTop + plot_h) << "\" x2=\""
        << fmt("%.2f", kLeft + plot_w) << "\" y2=\"" << fmt("%.2f", y0 + kTop + plot_h) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"4\" y=\"" << fmt("%.2f", y0 + kTop + 4) << "\">" << fmt("%.6g", hi) << "</text>\n";
    svg << "<text x=\"4\" y=\"" << fmt("%.2f", y0 + kTop + plot_h) << "\">" << fmt("%.6g", lo) << "</text>\n";
    svg << "<text x=\"" << fmt("%.2f", kLeft + plot_w - 40) << "\" y=\"" << fmt("%.2f", y0 + panel_height - 8)
        << "\">" << longest << "</text>\n";

    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      const auto& series = panel.series[s];
      svg << "<polyline fill=\"none\" stroke=\"" << escape(series.color) << "\" stroke-width=\"1\" data-label=\""
          << escape(series.label) << "\" points=\"";
      for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (i) svg << ' ';
        svg << fmt("%.2f", px(i)) << ',' << fmt("%.2f", py(series.values[i]));
      }
      svg << "\"/>\n";
      const double ly = y0 + kTop + 14.0 * static_cast<double>(s + 1);
      svg << "<text class=\"legend\" x=\"" << fmt("%.2f", kLeft + plot_w - 120) << "\" y=\"" << fmt("%.2f", ly)
          << "\" fill=\"" << escape(series.color) << "\">" << escape(series.label) << "</text>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace tsgan
