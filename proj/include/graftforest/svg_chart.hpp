#pragma once

#include <string>
#include <vector>

namespace graftforest {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<ChartSeries> series;
};

std::string render_line_chart(const LineChart& chart);

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> labels;
  std::vector<double> values;
};

std::string render_bar_chart(const BarChart& chart);

/// Square grid of values in [0,1] (clamped), row 0 at the bottom.
struct HeatmapPanel {
  std::string title;
  std::size_t resolution = 0;
  std::vector<double> values;
};

std::string render_heatmaps(const std::string& title, const std::vector<HeatmapPanel>& panels);

}  // namespace graftforest
