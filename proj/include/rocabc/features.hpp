// Minutiae configurations and their rotation/translation-invariant summary.
//
// A Configuration is an ordered list of minutiae; the index of a minutia is
// its pairing with the same index in any other configuration it is compared
// against. The summary vector holds, in this order:
//
//   cross_dists             C(k,2) distances between minutia locations
//   centroid_dists          k distances from each minutia to the centroid
//   dir_marker_cross_dists  C(k,2) distances between direction-marker ends
//   centroid_angles         k angles (degrees) between the centroid axis and
//                           the minutia direction, counterclockwise
//   types                   k minutia types
//
// for k^2 + 2k scalars in total. Pair lists use lexicographic (i, j), i < j.
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rocabc/common.hpp"

namespace rocabc {

enum class MinutiaType { RidgeEnding, Bifurcation, Unknown };

inline std::string_view to_string(MinutiaType t) {
  switch (t) {
    case MinutiaType::RidgeEnding: return "ending";
    case MinutiaType::Bifurcation: return "bifurcation";
    case MinutiaType::Unknown: return "unknown";
  }
  return "unknown";
}

inline MinutiaType minutia_type_from_string(std::string_view s) {
  if (s == "ending") return MinutiaType::RidgeEnding;
  if (s == "bifurcation") return MinutiaType::Bifurcation;
  if (s == "unknown") return MinutiaType::Unknown;
  throw PreconditionError("unknown minutia type '" + std::string(s) + "'");
}

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDefaultSegmentLength = 30.0;  // px, about three ridge periods at 500 ppi

/// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;  // fmod rounding on tiny negatives
  return r;
}

inline double wrap_degrees(double a) {
  double r = std::fmod(a, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;
  return r;
}

struct Minutia {
  double x = 0.0;
  double y = 0.0;
  double direction = 0.0;  // radians, counterclockwise, [0, 2*pi)
  MinutiaType type = MinutiaType::Unknown;

  Point location() const { return {x, y}; }
  friend bool operator==(const Minutia&, const Minutia&) = default;
};

/// Ordered minutiae. Directions are normalised on construction.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<Minutia> minutiae) : minutiae_(std::move(minutiae)) {
    for (auto& m : minutiae_) {
      require(std::isfinite(m.x) && std::isfinite(m.y) && std::isfinite(m.direction),
              "minutia fields must be finite");
      m.direction = wrap_angle(m.direction);
    }
  }

  std::size_t size() const { return minutiae_.size(); }
  bool empty() const { return minutiae_.empty(); }
  const Minutia& operator[](std::size_t i) const { return minutiae_[i]; }
  auto begin() const { return minutiae_.begin(); }
  auto end() const { return minutiae_.end(); }
  const std::vector<Minutia>& minutiae() const { return minutiae_; }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<Minutia> minutiae_;
};

/// Rotates about the origin by `angle` (radians), then translates.
inline Configuration rigid_transform(const Configuration& c, double angle, double tx, double ty) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  std::vector<Minutia> out;
  out.reserve(c.size());
  for (const auto& m : c) {
    out.push_back({ca * m.x - sa * m.y + tx, sa * m.x + ca * m.y + ty, m.direction + angle, m.type});
  }
  return Configuration(std::move(out));
}

struct SummaryVector {
  std::vector<double> cross_dists;
  std::vector<double> centroid_dists;
  std::vector<double> dir_marker_cross_dists;
  std::vector<double> centroid_angles;
  std::vector<MinutiaType> types;

  std::size_t k() const { return types.size(); }
  std::size_t scalar_size() const {
    return cross_dists.size() + centroid_dists.size() + dir_marker_cross_dists.size() +
           centroid_angles.size() + types.size();
  }
};

inline Point centroid(const Configuration& c) {
  require(!c.empty(), "centroid of an empty configuration");
  double sx = 0.0, sy = 0.0;
  for (const auto& m : c) {
    sx += m.x;
    sy += m.y;
  }
  const double n = static_cast<double>(c.size());
  return {sx / n, sy / n};
}

namespace detail {

inline std::vector<double> pairwise_distances(std::span<const Point> pts) {
  const std::size_t k = pts.size();
  std::vector<double> out;
  out.reserve(k * (k - 1) / 2);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) out.push_back(distance(pts[i], pts[j]));
  return out;
}

inline std::vector<Point> locations(const Configuration& c) {
  std::vector<Point> pts;
  pts.reserve(c.size());
  for (const auto& m : c) pts.push_back(m.location());
  return pts;
}

}  // namespace detail

inline std::vector<double> cross_distances(const Configuration& c) {
  require(c.size() >= 2, "cross distances need at least two minutiae");
  const auto pts = detail::locations(c);
  return detail::pairwise_distances(pts);
}

/// End points of the fixed-length segments drawn along each minutia direction.
inline std::vector<Point> direction_markers(const Configuration& c,
                                            double seg_len = kDefaultSegmentLength) {
  require(seg_len > 0.0 && std::isfinite(seg_len), "segment length must be positive");
  std::vector<Point> out;
  out.reserve(c.size());
  for (const auto& m : c)
    out.push_back({m.x + seg_len * std::cos(m.direction), m.y + seg_len * std::sin(m.direction)});
  return out;
}

inline std::vector<double> dir_marker_cross_distances(const Configuration& c,
                                                      double seg_len = kDefaultSegmentLength) {
  require(c.size() >= 2, "cross distances need at least two minutiae");
  const auto markers = direction_markers(c, seg_len);
  return detail::pairwise_distances(markers);
}

inline std::vector<double> centroid_distances(const Configuration& c) {
  const Point g = centroid(c);
  std::vector<double> out;
  out.reserve(c.size());
  for (const auto& m : c) out.push_back(distance(m.location(), g));
  return out;
}

/// Angle in degrees from the centroid->minutia axis to the minutia direction.
inline std::vector<double> centroid_angles(const Configuration& c) {
  const Point g = centroid(c);
  std::vector<double> out;
  out.reserve(c.size());
  for (const auto& m : c) {
    const double dx = m.x - g.x, dy = m.y - g.y;
    if (std::hypot(dx, dy) < 1e-9) throw PreconditionError("minutia coincides with the centroid");
    const double axis = std::atan2(dy, dx);
    out.push_back(wrap_degrees((m.direction - axis) * 180.0 / std::numbers::pi));
  }
  return out;
}

inline SummaryVector summarize(const Configuration& c, double seg_len = kDefaultSegmentLength) {
  require(c.size() >= 3, "summary needs at least three minutiae");
  SummaryVector s;
  s.cross_dists = cross_distances(c);
  s.centroid_dists = centroid_distances(c);
  s.dir_marker_cross_dists = dir_marker_cross_distances(c, seg_len);
  s.centroid_angles = centroid_angles(c);
  s.types.reserve(c.size());
  for (const auto& m : c) s.types.push_back(m.type);
  return s;
}

/// Flattens to k^2 + 2k doubles; types are encoded as 0, 1, 2.
inline std::vector<double> flatten(const SummaryVector& s) {
  std::vector<double> out;
  out.reserve(s.scalar_size());
  out.insert(out.end(), s.cross_dists.begin(), s.cross_dists.end());
  out.insert(out.end(), s.centroid_dists.begin(), s.centroid_dists.end());
  out.insert(out.end(), s.dir_marker_cross_dists.begin(), s.dir_marker_cross_dists.end());
  out.insert(out.end(), s.centroid_angles.begin(), s.centroid_angles.end());
  for (auto t : s.types) out.push_back(static_cast<double>(static_cast<int>(t)));
  return out;
}

}  // namespace rocabc
