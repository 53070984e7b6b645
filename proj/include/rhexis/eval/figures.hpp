#pragma once

// ============================================================================
// Minimal chart rendering (OpenCV): a line chart for AUC-vs-horizon curves
// and a bar chart with confidence whiskers for per-class AUC. Layout is
// fixed-size with generous margins; nothing here is configurable beyond
// the data and titles.
// ============================================================================

#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "rhexis/common.hpp"

namespace rhexis::eval {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

namespace fig_detail {

inline const std::vector<cv::Scalar>& palette() {
  static const std::vector<cv::Scalar> p = {
      {180, 119, 31},  // blue   (BGR)
      {14, 127, 255},  // orange
      {44, 160, 44},   // green
      {40, 39, 214},   // red
      {189, 103, 148}, // purple
      {75, 86, 140},   // brown
  };
  return p;
}

struct Frame {
  cv::Mat canvas;
  int x0, y0, x1, y1;  // plot area corners (x0<x1, y0<y1 in pixel space)
  double xmin, xmax, ymin, ymax;

  cv::Point map(double x, double y) const {
    const double fx = (x - xmin) / (xmax - xmin);
    const double fy = (y - ymin) / (ymax - ymin);
    return {static_cast<int>(std::lround(x0 + fx * (x1 - x0))),
            static_cast<int>(std::lround(y1 - fy * (y1 - y0)))};
  }
};

inline Frame make_frame(const std::string& title, const std::string& x_label,
                        const std::string& y_label, double xmin, double xmax,
                        double ymin, double ymax) {
  Frame f;
  f.canvas = cv::Mat(600, 900, CV_8UC3, cv::Scalar(255, 255, 255));
  f.x0 = 90;
  f.y0 = 60;
  f.x1 = 860;
  f.y1 = 540;
  f.xmin = xmin;
  f.xmax = xmax;
  f.ymin = ymin;
  f.ymax = ymax;
  cv::rectangle(f.canvas, {f.x0, f.y0}, {f.x1, f.y1}, {0, 0, 0}, 1);
  cv::putText(f.canvas, title, {f.x0, 38}, cv::FONT_HERSHEY_SIMPLEX, 0.8,
              {0, 0, 0}, 2, cv::LINE_AA);
  cv::putText(f.canvas, x_label, {(f.x0 + f.x1) / 2 - 60, 580},
              cv::FONT_HERSHEY_SIMPLEX, 0.55, {0, 0, 0}, 1, cv::LINE_AA);
  cv::putText(f.canvas, y_label, {12, (f.y0 + f.y1) / 2},
              cv::FONT_HERSHEY_SIMPLEX, 0.55, {0, 0, 0}, 1, cv::LINE_AA);
  // Horizontal gridlines + y ticks.
  for (int i = 0; i <= 5; ++i) {
    const double v = ymin + (ymax - ymin) * i / 5.0;
    const cv::Point p = f.map(xmin, v);
    cv::line(f.canvas, {f.x0, p.y}, {f.x1, p.y}, {230, 230, 230}, 1);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    cv::putText(f.canvas, buf, {f.x0 - 58, p.y + 5}, cv::FONT_HERSHEY_SIMPLEX,
                0.45, {0, 0, 0}, 1, cv::LINE_AA);
  }
  return f;
}

}  // namespace fig_detail

inline void save_line_chart(const std::filesystem::path& path,
                            const std::string& title,
                            const std::string& x_label,
                            const std::string& y_label,
                            const std::vector<Series>& series, double ymin,
                            double ymax) {
  if (series.empty()) throw DataError("line chart: no series");
  double xmin = series[0].x.front(), xmax = series[0].x.front();
  for (const Series& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw DataError("line chart: malformed series '" + s.name + "'");
    for (double x : s.x) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  }
  if (xmax == xmin) xmax = xmin + 1;

  fig_detail::Frame f =
      fig_detail::make_frame(title, x_label, y_label, xmin, xmax, ymin, ymax);
  // x ticks at the union of sample positions of the first series.
  for (double x : series[0].x) {
    const cv::Point p = f.map(x, f.ymin);
    cv::line(f.canvas, {p.x, f.y1}, {p.x, f.y1 + 6}, {0, 0, 0}, 1);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    cv::putText(f.canvas, buf, {p.x - 8, f.y1 + 24}, cv::FONT_HERSHEY_SIMPLEX,
                0.45, {0, 0, 0}, 1, cv::LINE_AA);
  }
  for (size_t si = 0; si < series.size(); ++si) {
    const cv::Scalar color =
        fig_detail::palette()[si % fig_detail::palette().size()];
    const Series& s = series[si];
    for (size_t i = 0; i + 1 < s.x.size(); ++i)
      cv::line(f.canvas, f.map(s.x[i], s.y[i]), f.map(s.x[i + 1], s.y[i + 1]),
               color, 2, cv::LINE_AA);
    for (size_t i = 0; i < s.x.size(); ++i)
      cv::circle(f.canvas, f.map(s.x[i], s.y[i]), 4, color, cv::FILLED,
                 cv::LINE_AA);
    // Legend entry.
    const int ly = f.y0 + 22 + static_cast<int>(si) * 24;
    cv::line(f.canvas, {f.x1 - 180, ly - 4}, {f.x1 - 150, ly - 4}, color, 3);
    cv::putText(f.canvas, s.name, {f.x1 - 140, ly}, cv::FONT_HERSHEY_SIMPLEX,
                0.5, {0, 0, 0}, 1, cv::LINE_AA);
  }
  if (!path.parent_path().empty())
    std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), f.canvas))
    throw DataError("failed to write figure: " + path.string());
}

struct Bar {
  std::string label;
  double value = 0;
  double ci_low = 0;
  double ci_high = 0;
  bool whisker = false;
};

inline void save_bar_chart(const std::filesystem::path& path,
                           const std::string& title,
                           const std::string& y_label,
                           const std::vector<Bar>& bars, double ymin,
                           double ymax) {
  if (bars.empty()) throw DataError("bar chart: no bars");
  fig_detail::Frame f = fig_detail::make_frame(
      title, "", y_label, 0, static_cast<double>(bars.size()), ymin, ymax);
  const double slot = 1.0;
  for (size_t i = 0; i < bars.size(); ++i) {
    const cv::Scalar color =
        fig_detail::palette()[i % fig_detail::palette().size()];
    const double cx = (static_cast<double>(i) + 0.5) * slot;
    const cv::Point top = f.map(cx, std::clamp(bars[i].value, ymin, ymax));
    const cv::Point base = f.map(cx, ymin);
    const int half_w = (f.x1 - f.x0) / static_cast<int>(bars.size()) * 3 / 10;
    cv::rectangle(f.canvas, {top.x - half_w, top.y}, {base.x + half_w, base.y},
                  color, cv::FILLED);
    if (bars[i].whisker) {
      const cv::Point lo = f.map(cx, std::clamp(bars[i].ci_low, ymin, ymax));
      const cv::Point hi = f.map(cx, std::clamp(bars[i].ci_high, ymin, ymax));
      cv::line(f.canvas, lo, hi, {0, 0, 0}, 2);
      cv::line(f.canvas, {lo.x - 8, lo.y}, {lo.x + 8, lo.y}, {0, 0, 0}, 2);
      cv::line(f.canvas, {hi.x - 8, hi.y}, {hi.x + 8, hi.y}, {0, 0, 0}, 2);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", bars[i].value);
    cv::putText(f.canvas, buf, {top.x - 24, top.y - 8},
                cv::FONT_HERSHEY_SIMPLEX, 0.45, {0, 0, 0}, 1, cv::LINE_AA);
    cv::putText(f.canvas, bars[i].label, {base.x - half_w, f.y1 + 24},
                cv::FONT_HERSHEY_SIMPLEX, 0.42, {0, 0, 0}, 1, cv::LINE_AA);
  }
  if (!path.parent_path().empty())
    std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), f.canvas))
    throw DataError("failed to write figure: " + path.string());
}

}  // namespace rhexis::eval
