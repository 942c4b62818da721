#include "lmj/plot.hpp"

#include <algorithm>
#include <cstdio>

namespace lmj {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
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
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string anomaly_plot_svg(const AnomalyReport& report, const std::string& title) {
  constexpr double kWidth = 800, kLeft = 50, kRight = 20, kTop = 30;
  constexpr double kSignalH = 220, kGap = 30, kStripH = 30, kBottom = 30;
  const double plot_w = kWidth - kLeft - kRight;
  const double height = kTop + kSignalH + kGap + kStripH + kBottom;
  const std::size_t n = report.size();
  const double thresh = report.threshold > 0.0 ? report.threshold : 1.0;

  double ymax = 2.0;
  for (double y : report.y) ymax = std::max(ymax, y / thresh);
  ymax *= 1.05;
  auto px = [&](double i) { return kLeft + (n > 1 ? i / static_cast<double>(n - 1) : 0.0) * plot_w; };
  auto py = [&](double v) { return kTop + kSignalH * (1.0 - v / ymax); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(height) +
         "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kLeft) + "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" +
         escape(title) + "</text>\n";

  // (a) normalized anomaly signal
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(plot_w) +
         "\" height=\"" + num(kSignalH) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg += "<text x=\"5\" y=\"" + num(kTop + 12) +
         "\" font-family=\"sans-serif\" font-size=\"11\">(a)</text>\n";
  if (n > 0) {
    svg += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) svg += ' ';
      svg += num(px(static_cast<double>(i))) + "," + num(py(report.y[i] / thresh));
    }
    svg += "\"/>\n";
  }
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(1.0)) + "\" x2=\"" +
         num(kLeft + plot_w) + "\" y2=\"" + num(py(1.0)) +
         "\" stroke=\"black\" stroke-dasharray=\"4,3\"/>\n";

  // (b) final anomaly strip
  const double strip_y = kTop + kSignalH + kGap;
  svg += "<text x=\"5\" y=\"" + num(strip_y + 12) +
         "\" font-family=\"sans-serif\" font-size=\"11\">(b)</text>\n";
  const double cell = n > 0 ? plot_w / static_cast<double>(n) : plot_w;
  for (std::size_t i = 0; i < n; ++i) {
    svg += "<rect x=\"" + num(kLeft + cell * static_cast<double>(i)) + "\" y=\"" + num(strip_y) +
           "\" width=\"" + num(cell + 0.05) + "\" height=\"" + num(kStripH) + "\" fill=\"" +
           (report.final_flag[i] ? "#d62728" : "#2ca02c") + "\"/>\n";
  }
  svg += "<text x=\"" + num(kLeft) + "\" y=\"" + num(height - 8) +
         "\" font-family=\"sans-serif\" font-size=\"11\">frame</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace lmj
