// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace vemo::eval::svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  bool bars = false;  // draw the first series as bars starting at y = 0
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Plain 640x400 chart with linear x and linear or log10 y.
inline void plot(std::ostream& out, const Axes& ax, const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  auto ty = [&](double v) { return ax.log_y ? std::log10(std::max(v, 1e-300)) : v; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (ax.log_y && !(s.y[i] > 0.0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (ax.bars) y0 = std::min(y0, 0.0);
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };
  auto py_raw = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  out << "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(ax.title) << "</text>\n";
  out << "<rect x=\"" << num(L) << "\" y=\"" << num(T) << "\" width=\"" << num(W - L - R) << "\" height=\""
      << num(H - T - B) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(H - B + 16) << "\" text-anchor=\"middle\">" << tick(xv)
        << "</text>\n";
    out << "<text x=\"" << num(L - 6) << "\" y=\"" << num(py_raw(yv) + 4) << "\" text-anchor=\"end\">"
        << (ax.log_y ? "1e" + tick(yv) : tick(yv)) << "</text>\n";
  }
  out << "<text x=\"" << num((L + W - R) / 2) << "\" y=\"" << num(H - 12) << "\" text-anchor=\"middle\">"
      << escape(ax.x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << num((T + H - B) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num((T + H - B) / 2) << ")\">" << escape(ax.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    if (ax.bars && k == 0 && s.x.size() > 1) {
      const double w = (px(s.x[1]) - px(s.x[0])) * 0.9;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double top = py(s.y[i]);
        out << "<rect x=\"" << num(px(s.x[i]) - w / 2) << "\" y=\"" << num(top) << "\" width=\"" << num(w)
            << "\" height=\"" << num(py_raw(0.0) - top) << "\" fill=\"" << s.color << "\"/>\n";
      }
      continue;
    }
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (ax.log_y && !(s.y[i] > 0.0)) continue;
      out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << num(W - R - 8) << "\" y=\"" << num(T + 16 + 14 * static_cast<double>(k))
        << "\" text-anchor=\"end\" fill=\"" << s.color << "\">" << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace vemo::eval::svg
