#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "clustgeo/numfmt.hpp"

namespace clustgeo::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<std::optional<double>> y;  // gaps are skipped
  bool dashed = false;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 640;
  int height = 420;
};

namespace detail {

inline std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

// Tick step of 1, 2 or 5 times a power of ten giving roughly `target` ticks.
inline double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

inline std::string px(double v) { return format_sig(std::round(v * 100.0) / 100.0, 10); }

}  // namespace detail

inline void render(std::ostream& out, const LineChart& c) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : c.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!s.y[i]) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, *s.y[i]);
      ymax = std::max(ymax, *s.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double ystep = detail::nice_step(ymax - ymin, 5);
  ymin = std::floor(ymin / ystep) * ystep;
  ymax = std::ceil(ymax / ystep) * ystep;
  const double xstep = detail::nice_step(xmax - xmin, 5);

  const double left = 70, right = 20, top = 40, bottom = 90;
  const double pw = c.width - left - right, ph = c.height - top - bottom;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width << "\" height=\"" << c.height
      << "\" viewBox=\"0 0 " << c.width << ' ' << c.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!c.title.empty())
    out << "<text x=\"" << detail::px(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << detail::escape(c.title) << "</text>\n";
  out << "<rect x=\"" << detail::px(left) << "\" y=\"" << detail::px(top) << "\" width=\"" << detail::px(pw)
      << "\" height=\"" << detail::px(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0;; ++i) {
    const double y = ymin + i * ystep;
    if (y > ymax + ystep * 1e-9) break;
    out << "<line x1=\"" << detail::px(left - 5) << "\" y1=\"" << detail::px(sy(y)) << "\" x2=\"" << detail::px(left)
        << "\" y2=\"" << detail::px(sy(y)) << "\" stroke=\"black\"/>"
        << "<text x=\"" << detail::px(left - 8) << "\" y=\"" << detail::px(sy(y) + 4) << "\" text-anchor=\"end\">"
        << format_sig(std::round(y / ystep) * ystep, 6) << "</text>\n";
  }
  for (int i = 0;; ++i) {
    const double x = std::ceil(xmin / xstep) * xstep + i * xstep;
    if (x > xmax + xstep * 1e-9) break;
    out << "<line x1=\"" << detail::px(sx(x)) << "\" y1=\"" << detail::px(top + ph) << "\" x2=\"" << detail::px(sx(x))
        << "\" y2=\"" << detail::px(top + ph + 5) << "\" stroke=\"black\"/>"
        << "<text x=\"" << detail::px(sx(x)) << "\" y=\"" << detail::px(top + ph + 18) << "\" text-anchor=\"middle\">"
        << format_sig(std::round(x / xstep) * xstep, 6) << "</text>\n";
  }
  out << "<text x=\"" << detail::px(left + pw / 2) << "\" y=\"" << detail::px(top + ph + 38)
      << "\" text-anchor=\"middle\">" << detail::escape(c.x_label) << "</text>\n";
  out << "<text transform=\"translate(18," << detail::px(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << detail::escape(c.y_label) << "</text>\n";

  for (const auto& s : c.series) {
    out << "<polyline class=\"series\" data-name=\"" << detail::escape(s.name)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
        << " points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!s.y[i]) continue;
      out << (first ? "" : " ") << detail::px(sx(s.x[i])) << ',' << detail::px(sy(*s.y[i]));
      first = false;
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.y[i])
        out << "<circle cx=\"" << detail::px(sx(s.x[i])) << "\" cy=\"" << detail::px(sy(*s.y[i]))
            << "\" r=\"2.5\" fill=\"black\"/>\n";
  }

  double ly = top + ph + 58;
  for (const auto& s : c.series) {
    out << "<line x1=\"" << detail::px(left) << "\" y1=\"" << detail::px(ly) << "\" x2=\"" << detail::px(left + 30)
        << "\" y2=\"" << detail::px(ly) << "\" stroke=\"black\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>"
        << "<text x=\"" << detail::px(left + 38) << "\" y=\"" << detail::px(ly + 4) << "\">" << detail::escape(s.name)
        << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";
}

}  // namespace clustgeo::svg
