// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

namespace tsgan {

struct PlotSeries {
  std::string label;
  std::string color;
  std::vector<double> values;
};

struct PlotPanel {
  std::string title;
  std::vector<PlotSeries> series;
};

/// Line chart with one stacked panel per entry, one <polyline> per series
/// (one point per value) and a legend. Flat series get a padded y-range.
/// Throws DataError if any series is empty or non-finite.
std::string render_svg(std::span<const PlotPanel> panels, int width = 960, int panel_height = 320);

}  // namespace tsgan
