#include "cellscape/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cellscape {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

std::size_t Polyline::segment_count() const {
  if (points.size() < 2) return 0;
  return closed ? points.size() : points.size() - 1;
}

double Polyline::length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < segment_count(); ++i) total += (segment_end(i) - segment_start(i)).norm();
  return total;
}

Point Polyline::point_at(double fraction) const {
  if (points.empty()) return Point::Zero();
  const double target = std::clamp(fraction, 0.0, 1.0) * length();
  double walked = 0.0;
  for (std::size_t i = 0; i < segment_count(); ++i) {
    const Point a = segment_start(i), b = segment_end(i);
    const double len = (b - a).norm();
    if (walked + len >= target && len > 0.0) return a + (b - a) * ((target - walked) / len);
    walked += len;
  }
  return closed ? points.front() : points.back();
}

Eigen::AlignedBox2d Polyline::bounds() const {
  Eigen::AlignedBox2d box;
  for (const Point& p : points) box.extend(p);
  return box;
}

Polyline transformed(const Polyline& line, const Eigen::Affine2d& transform) {
  Polyline out{{}, line.closed};
  out.points.reserve(line.points.size());
  for (const Point& p : line.points) out.points.push_back(transform * p);
  return out;
}

bool point_in_polygon(const std::vector<Point>& ring, const Point& p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = ring[j];
    const Point& b = ring[i];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x > p.x()) inside = !inside;
    }
  }
  return inside;
}

double signed_area(const std::vector<Point>& ring) {
  double twice = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) twice += cross(ring[j], ring[i]);
  return 0.5 * twice;
}

std::vector<double> scanline_crossings(const std::vector<Point>& ring, double y) {
  std::vector<double> xs;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = ring[j];
    const Point& b = ring[i];
    if ((a.y() > y) != (b.y() > y)) xs.push_back(a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

bool self_intersects(const std::vector<Point>& ring) {
  const std::size_t n = ring.size();
  if (n < 4) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (segments_cross(a, b, ring[j], ring[(j + 1) % n])) return true;
    }
  }
  return false;
}

PathProjection project_onto(const Polyline& path, const Point& p) {
  PathProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  const std::size_t segments = path.segment_count();
  if (segments == 0) {
    if (!path.points.empty()) {
      best.nearest = path.points.front();
      best.distance = best.signed_distance = (p - best.nearest).norm();
    }
    return best;
  }

  std::size_t best_segment = 0;
  double best_t = 0.0;
  for (std::size_t i = 0; i < segments; ++i) {
    const Point a = path.segment_start(i), b = path.segment_end(i);
    const Point ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Point q = a + t * ab;
    const double d = (p - q).norm();
    if (d < best.distance) {
      best.distance = d;
      best.nearest = q;
      best_segment = i;
      best_t = t;
    }
  }

  // Local travel direction; at a shared vertex use the bisector of the two
  // incident segments so the sign agrees on both sides of the corner.
  auto direction = [&](std::size_t i) { return (path.segment_end(i) - path.segment_start(i)).normalized(); };
  Point dir = direction(best_segment);
  if (best_t == 1.0 && (path.closed || best_segment + 1 < segments))
    dir = dir + direction((best_segment + 1) % segments);
  else if (best_t == 0.0 && (path.closed || best_segment > 0))
    dir = dir + direction((best_segment + segments - 1) % segments);
  const double side = cross(dir, p - best.nearest);
  best.signed_distance = side < 0.0 ? -best.distance : best.distance;
  return best;
}

}  // namespace cellscape
