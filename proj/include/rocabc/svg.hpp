// Minimal SVG line and box plots plus the kernel density estimate behind the
// score-density figures. Output depends only on the inputs.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "rocabc/common.hpp"

namespace rocabc::svg {

/// Silverman's rule: 0.9 min(sd, IQR / 1.34) n^(-1/5).
inline double silverman_bandwidth(std::vector<double> x) {
  require(x.size() >= 2, "silverman_bandwidth: need two values");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  auto q = [&](double p) {
    const double pos = p * (n - 1.0);
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    return i + 1 < x.size() ? x[i] * (1.0 - f) + x[i + 1] * f : x.back();
  };
  const double iqr = q(0.75) - q(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
  return 0.9 * spread * std::pow(n, -0.2);
}

struct Curve {
  std::vector<double> x;
  std::vector<double> y;
};

/// Gaussian KDE on `points` equally spaced values spanning the data +- 3h.
inline Curve kde(const std::vector<double>& data, std::size_t points = 512) {
  require(points >= 2, "kde: need at least two grid points");
  const double h = silverman_bandwidth(data);
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  const double lo = *lo_it - 3.0 * h, hi = *hi_it + 3.0 * h;
  std::vector<double> sorted = data;
  std::sort(sorted.begin(), sorted.end());
  Curve c;
  const double norm = 1.0 / (static_cast<double>(data.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    // Points further than 8h contribute below 1e-14 each.
    const auto a = std::lower_bound(sorted.begin(), sorted.end(), x - 8.0 * h);
    const auto b = std::upper_bound(sorted.begin(), sorted.end(), x + 8.0 * h);
    double s = 0.0;
    for (auto it = a; it != b; ++it) {
      const double z = (x - *it) / h;
      s += std::exp(-0.5 * z * z);
    }
    c.x.push_back(x);
    c.y.push_back(s * norm);
  }
  return c;
}

inline double trapezoid(const Curve& c) {
  double s = 0.0;
  for (std::size_t i = 1; i < c.x.size(); ++i) s += 0.5 * (c.y[i] + c.y[i - 1]) * (c.x[i] - c.x[i - 1]);
  return s;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

/// Canvas with a rectangular data window mapped onto a fixed plot area.
class Plot {
 public:
  Plot(std::string title, std::string xlabel, std::string ylabel, double x0, double x1, double y0, double y1)
      : x0_(x0), x1_(x1 > x0 ? x1 : x0 + 1.0), y0_(y0), y1_(y1 > y0 ? y1 : y0 + 1.0) {
    body_ += "<text x=\"" + fmt(kW / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title + "</text>\n";
    body_ += "<text x=\"" + fmt(kW / 2) + "\" y=\"" + fmt(kH - 10) + "\" text-anchor=\"middle\" font-size=\"13\">" +
             xlabel + "</text>\n";
    body_ += "<text x=\"16\" y=\"" + fmt(kH / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
             fmt(kH / 2) + ")\">" + ylabel + "</text>\n";
    body_ += "<rect x=\"" + fmt(kL) + "\" y=\"" + fmt(kT) + "\" width=\"" + fmt(kW - kL - kR) + "\" height=\"" +
             fmt(kH - kT - kB) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x0_ + (x1_ - x0_) * i / 4.0, fy = y0_ + (y1_ - y0_) * i / 4.0;
      body_ += "<text x=\"" + fmt(px(fx)) + "\" y=\"" + fmt(kH - kB + 16) + "\" text-anchor=\"middle\" font-size=\"11\">" +
               tick(fx) + "</text>\n";
      body_ += "<text x=\"" + fmt(kL - 6) + "\" y=\"" + fmt(py(fy) + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
               tick(fy) + "</text>\n";
    }
  }

  void polyline(const std::vector<double>& x, const std::vector<double>& y, const std::string& colour,
                double width = 1.5) {
    std::string pts;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
      pts += fmt(px(x[i])) + "," + fmt(py(y[i])) + " ";
    }
    body_ += "<polyline fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"" + fmt(width) + "\" points=\"" + pts +
             "\"/>\n";
  }

  void box(double xc, double half_width, double q1, double med, double q3, double lo, double hi,
           const std::string& colour) {
    const double l = px(xc - half_width), r = px(xc + half_width);
    body_ += "<rect x=\"" + fmt(l) + "\" y=\"" + fmt(py(q3)) + "\" width=\"" + fmt(r - l) + "\" height=\"" +
             fmt(py(q1) - py(q3)) + "\" fill=\"" + colour + "\" fill-opacity=\"0.3\" stroke=\"" + colour + "\"/>\n";
    line(xc - half_width, med, xc + half_width, med, "black");
    line(xc, q3, xc, hi, colour);
    line(xc, q1, xc, lo, colour);
  }

  void line(double xa, double ya, double xb, double yb, const std::string& colour) {
    body_ += "<line x1=\"" + fmt(px(xa)) + "\" y1=\"" + fmt(py(ya)) + "\" x2=\"" + fmt(px(xb)) + "\" y2=\"" +
             fmt(py(yb)) + "\" stroke=\"" + colour + "\"/>\n";
  }

  void label(double x, double y, const std::string& text) {
    body_ += "<text x=\"" + fmt(px(x)) + "\" y=\"" + fmt(py(y)) + "\" text-anchor=\"middle\" font-size=\"11\">" + text +
             "</text>\n";
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = kT + 16;
    for (const auto& [name, colour] : entries) {
      body_ += "<line x1=\"" + fmt(kW - kR - 120) + "\" y1=\"" + fmt(y - 4) + "\" x2=\"" + fmt(kW - kR - 100) +
               "\" y2=\"" + fmt(y - 4) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
      body_ += "<text x=\"" + fmt(kW - kR - 95) + "\" y=\"" + fmt(y) + "\" font-size=\"11\">" + name + "</text>\n";
      y += 16;
    }
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kW) + "\" height=\"" + fmt(kH) +
           "\" viewBox=\"0 0 " + fmt(kW) + " " + fmt(kH) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           body_ + "</svg>\n";
  }

 private:
  static constexpr double kW = 640, kH = 480, kL = 70, kR = 20, kT = 40, kB = 50;

  double px(double x) const { return kL + (x - x0_) / (x1_ - x0_) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - y0_) / (y1_ - y0_) * (kH - kT - kB); }

  static std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

  double x0_, x1_, y0_, y1_;
  std::string body_;
};

}  // namespace rocabc::svg
