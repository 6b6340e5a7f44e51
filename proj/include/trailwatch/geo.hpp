#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace trailwatch {

/// Planar point, meters east (x) / north (y) of the area origin. The rescue
/// area is a few kilometres across, so a local tangent plane is used for all
/// geometry; degrees only appear at the report boundary.
struct GeoPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const GeoPoint& a, const GeoPoint& b) {
    return a.x == b.x && a.y == b.y;
  }
};

inline double distance(const GeoPoint& a, const GeoPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Nearest point of a polyline to a query point.
struct Projection {
  GeoPoint point;
  std::size_t segment_index = 0;  // segment between vertex i and i+1
  double arclength = 0.0;         // meters from the first vertex
  double distance = 0.0;          // query point to projected point
};

/// Open polyline with at least two distinct vertices. Arclengths are
/// precomputed once; all queries are O(#segments).
class TrailPolyline {
 public:
  explicit TrailPolyline(std::vector<GeoPoint> vertices)
      : vertices_(std::move(vertices)) {
    if (vertices_.size() < 2)
      throw std::invalid_argument("polyline needs at least two vertices");
    cum_.resize(vertices_.size());
    cum_[0] = 0.0;
    for (std::size_t i = 1; i < vertices_.size(); ++i) {
      const double seg = distance(vertices_[i - 1], vertices_[i]);
      if (seg <= 0.0)
        throw std::invalid_argument("polyline has a zero-length segment at index " +
                                    std::to_string(i - 1));
      cum_[i] = cum_[i - 1] + seg;
    }
  }

  const std::vector<GeoPoint>& vertices() const { return vertices_; }
  double length() const { return cum_.back(); }
  const std::vector<double>& cumulative() const { return cum_; }

  /// Point at arclength s in [0, length]. Outside the range is a caller bug.
  GeoPoint position_at(double s) const {
    if (s < 0.0 || s > length())
      throw std::out_of_range("arclength " + std::to_string(s) + " outside [0, " +
                              std::to_string(length()) + "]");
    // Find segment containing s; linear scan keeps this allocation free and
    // trails have few vertices.
    std::size_t i = 1;
    while (i + 1 < cum_.size() && cum_[i] < s) ++i;
    const double seg_len = cum_[i] - cum_[i - 1];
    const double t = (s - cum_[i - 1]) / seg_len;
    return {vertices_[i - 1].x + t * (vertices_[i].x - vertices_[i - 1].x),
            vertices_[i - 1].y + t * (vertices_[i].y - vertices_[i - 1].y)};
  }

  /// Orthogonal projection onto the polyline, clamped to segment ends.
  /// Among equidistant candidates the lowest segment index wins, which keeps
  /// the result deterministic at shared vertices.
  Projection project(const GeoPoint& p) const {
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
      const GeoPoint& a = vertices_[i];
      const GeoPoint& b = vertices_[i + 1];
      const double dx = b.x - a.x, dy = b.y - a.y;
      const double len2 = dx * dx + dy * dy;
      double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
      if (t < 0.0) t = 0.0;
      if (t > 1.0) t = 1.0;
      const GeoPoint q{a.x + t * dx, a.y + t * dy};
      const double d = distance(p, q);
      if (d < best.distance) {
        best.point = q;
        best.segment_index = i;
        best.arclength = cum_[i] + t * std::sqrt(len2);
        best.distance = d;
      }
    }
    return best;
  }

 private:
  std::vector<GeoPoint> vertices_;
  std::vector<double> cum_;
};

/// Intersection points of two circles. Returns 0, 1 or 2 points; tangency is
/// detected within `tol` meters so nearly touching circles from measured
/// radii still yield the single geometric answer. Coincident centers are a
/// caller bug (no finite answer exists).
inline std::vector<GeoPoint> circle_intersection(const GeoPoint& c1, double r1,
                                                 const GeoPoint& c2, double r2,
                                                 double tol = 1e-9) {
  const double d = distance(c1, c2);
  if (d == 0.0) throw std::invalid_argument("circle centers coincide");
  if (r1 < 0.0 || r2 < 0.0) throw std::invalid_argument("negative circle radius");

  if (d > r1 + r2 + tol) return {};            // separate
  if (d < std::abs(r1 - r2) - tol) return {};  // one inside the other

  const double a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
  double h2 = r1 * r1 - a * a;
  const double ux = (c2.x - c1.x) / d, uy = (c2.y - c1.y) / d;
  const GeoPoint mid{c1.x + a * ux, c1.y + a * uy};

  // Tangent (externally or internally) within tolerance: single point.
  if (d >= r1 + r2 - tol || d <= std::abs(r1 - r2) + tol || h2 <= tol * tol) {
    return {mid};
  }
  const double h = std::sqrt(h2);
  return {GeoPoint{mid.x + h * uy, mid.y - h * ux},
          GeoPoint{mid.x - h * uy, mid.y + h * ux}};
}

/// Proper or touching intersection of segments ab and cd. Used to find trail
/// junctions; collinear overlaps report the midpoint of the overlap.
inline bool segments_intersect(const GeoPoint& a, const GeoPoint& b,
                               const GeoPoint& c, const GeoPoint& d,
                               GeoPoint* where = nullptr) {
  const double rx = b.x - a.x, ry = b.y - a.y;
  const double sx = d.x - c.x, sy = d.y - c.y;
  const double denom = rx * sy - ry * sx;
  const double qpx = c.x - a.x, qpy = c.y - a.y;
  if (denom == 0.0) {
    if (qpx * ry - qpy * rx != 0.0) return false;  // parallel, not collinear
    // Collinear: project onto the dominant axis.
    const double rlen2 = rx * rx + ry * ry;
    double t0 = (qpx * rx + qpy * ry) / rlen2;
    double t1 = t0 + (sx * rx + sy * ry) / rlen2;
    if (t0 > t1) std::swap(t0, t1);
    const double lo = std::max(0.0, t0), hi = std::min(1.0, t1);
    if (lo > hi) return false;
    if (where) {
      const double tm = 0.5 * (lo + hi);
      *where = {a.x + tm * rx, a.y + tm * ry};
    }
    return true;
  }
  const double t = (qpx * sy - qpy * sx) / denom;
  const double u = (qpx * ry - qpy * rx) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
  if (where) *where = {a.x + t * rx, a.y + t * ry};
  return true;
}

/// Degrees <-> local meters. The equirectangular scale is fixed at the area
/// origin latitude; adequate well below the tag thresholds' granularity.
struct GeodeticOrigin {
  double lat_deg = 0.0;
  double lon_deg = 0.0;

  static constexpr double kMetersPerDegLat = 111320.0;

  double meters_per_deg_lon() const {
    return kMetersPerDegLat * std::cos(lat_deg * 0.017453292519943295);
  }

  void to_degrees(const GeoPoint& p, double* lat, double* lon) const {
    *lat = lat_deg + p.y / kMetersPerDegLat;
    *lon = lon_deg + p.x / meters_per_deg_lon();
  }

  GeoPoint from_degrees(double lat, double lon) const {
    return {(lon - lon_deg) * meters_per_deg_lon(),
            (lat - lat_deg) * kMetersPerDegLat};
  }
};

/// "49°34'24"N" style rendering used by behavior traces and reports.
inline std::string format_dms(double deg, bool is_lat) {
  const char hemi = deg >= 0 ? (is_lat ? 'N' : 'E') : (is_lat ? 'S' : 'W');
  double v = std::abs(deg);
  int d = static_cast<int>(v);
  double mf = (v - d) * 60.0;
  int m = static_cast<int>(mf);
  int s = static_cast<int>(std::lround((mf - m) * 60.0));
  if (s == 60) {
    s = 0;
    ++m;
  }
  if (m == 60) {
    m = 0;
    ++d;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%d\xC2\xB0%02d'%02d\"%c", d, m, s, hemi);
  return buf;
}

}  // namespace trailwatch
