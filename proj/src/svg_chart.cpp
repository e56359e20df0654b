#include "graftforest/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "graftforest/error.hpp"

namespace graftforest {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 200.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

std::string tick_label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3g", v);
  return buffer;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }
};

Axis make_axis(const std::vector<double>& values, bool log) {
  Axis axis;
  axis.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0.0)) continue;
    const double a = log ? std::log10(v) : v;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  axis.lo = lo - pad;
  axis.hi = hi + pad;
  return axis;
}

std::string header(double width, double height, const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
                  "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
  return s;
}

std::string frame(const Axis& x, const Axis& y, const std::string& x_label, const std::string& y_label) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  std::string s = "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
                  "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double f = t / 4.0;
    const double xv = x.lo + f * (x.hi - x.lo);
    const double yv = y.lo + f * (y.hi - y.lo);
    const double px = kLeft + f * pw;
    const double py = kTop + ph - f * ph;
    s += "<text x=\"" + num(px) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         tick_label(x.log ? std::pow(10.0, xv) : xv) + "</text>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" +
         tick_label(y.log ? std::pow(10.0, yv) : yv) + "</text>\n";
  }
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 16) + "\" text-anchor=\"middle\">" + escape(x_label) +
       "</text>\n";
  s += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num(kTop + ph / 2) + ")\">" + escape(y_label) + "</text>\n";
  return s;
}

}  // namespace

std::string render_line_chart(const LineChart& chart) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const ChartSeries& series : chart.series) {
    if (series.x.size() != series.y.size()) throw InputError("chart series '" + series.label + "' has mismatched x and y");
    xs.insert(xs.end(), series.x.begin(), series.x.end());
    ys.insert(ys.end(), series.y.begin(), series.y.end());
  }
  const Axis x = make_axis(xs, chart.log_x);
  const Axis y = make_axis(ys, chart.log_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;

  std::string s = header(kWidth, kHeight, chart.title);
  s += frame(x, y, chart.x_label, chart.y_label);
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const ChartSeries& series = chart.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < series.x.size(); ++i) {
      if ((chart.log_x && series.x[i] <= 0.0) || (chart.log_y && series.y[i] <= 0.0)) continue;
      const double px = kLeft + x.map(series.x[i]) * pw;
      const double py = kTop + ph - y.map(series.y[i]) * ph;
      points += num(px) + "," + num(py) + " ";
      s += "<circle cx=\"" + num(px) + "\" cy=\"" + num(py) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    s += "<line x1=\"" + num(kWidth - kRight + 12) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(kWidth - kRight + 32) +
         "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(kWidth - kRight + 38) + "\" y=\"" + num(ly) + "\">" + escape(series.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string render_bar_chart(const BarChart& chart) {
  if (chart.labels.size() != chart.values.size()) throw InputError("bar chart labels and values differ in length");
  double hi = 0.0;
  for (double v : chart.values) hi = std::max(hi, v);
  if (hi <= 0.0) hi = 1.0;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  Axis x;
  Axis y{0.0, hi * 1.1, false};
  std::string s = header(kWidth, kHeight, chart.title);
  s += frame(x, y, "", chart.y_label);
  const double slot = pw / static_cast<double>(std::max<std::size_t>(1, chart.values.size()));
  for (std::size_t k = 0; k < chart.values.size(); ++k) {
    const double h = y.map(chart.values[k]) * ph;
    const double px = kLeft + slot * static_cast<double>(k) + slot * 0.2;
    s += "<rect x=\"" + num(px) + "\" y=\"" + num(kTop + ph - h) + "\" width=\"" + num(slot * 0.6) + "\" height=\"" + num(h) +
         "\" fill=\"" + kPalette[k % std::size(kPalette)] + "\"/>\n";
    s += "<text x=\"" + num(px + slot * 0.3) + "\" y=\"" + num(kTop + ph - h - 6) + "\" text-anchor=\"middle\">" +
         tick_label(chart.values[k]) + "</text>\n";
    s += "<text x=\"" + num(px + slot * 0.3) + "\" y=\"" + num(kTop + ph + 36) + "\" text-anchor=\"middle\">" +
         escape(chart.labels[k]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string render_heatmaps(const std::string& title, const std::vector<HeatmapPanel>& panels) {
  constexpr double kPanel = 300.0;
  constexpr double kGap = 30.0;
  const double width = kGap + static_cast<double>(panels.size()) * (kPanel + kGap);
  const double height = kPanel + 90.0;
  std::string s = header(width, height, title);
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const HeatmapPanel& panel = panels[k];
    if (panel.values.size() != panel.resolution * panel.resolution) throw InputError("heatmap panel has the wrong size");
    const double x0 = kGap + static_cast<double>(k) * (kPanel + kGap);
    const double y0 = 60.0;
    const double cell = kPanel / static_cast<double>(std::max<std::size_t>(1, panel.resolution));
    s += "<text x=\"" + num(x0 + kPanel / 2) + "\" y=\"50\" text-anchor=\"middle\">" + escape(panel.title) + "</text>\n";
    for (std::size_t r = 0; r < panel.resolution; ++r) {
      for (std::size_t c = 0; c < panel.resolution; ++c) {
        const double v = std::clamp(panel.values[r * panel.resolution + c], 0.0, 1.0);
        const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
        const double py = y0 + kPanel - static_cast<double>(r + 1) * cell;
        s += "<rect x=\"" + num(x0 + static_cast<double>(c) * cell) + "\" y=\"" + num(py) + "\" width=\"" + num(cell + 0.05) +
             "\" height=\"" + num(cell + 0.05) + "\" fill=\"rgb(" + std::to_string(shade) + "," + std::to_string(shade) +
             ",255)\"/>\n";
      }
    }
    s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(kPanel) + "\" height=\"" + num(kPanel) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace graftforest
