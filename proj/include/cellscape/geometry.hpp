#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cellscape {

using Point = Eigen::Vector2d;

/// Flattened path. A closed polyline does not repeat its first point.
struct Polyline {
  std::vector<Point> points;
  bool closed = false;

  std::size_t segment_count() const;
  Point segment_start(std::size_t i) const { return points[i]; }
  Point segment_end(std::size_t i) const { return points[(i + 1) % points.size()]; }
  double length() const;
  /// Point at a fraction in [0,1] of the arclength.
  Point point_at(double fraction) const;
  Eigen::AlignedBox2d bounds() const;
};

Polyline transformed(const Polyline& line, const Eigen::Affine2d& transform);

/// Even-odd rule against the closed ring formed by the points.
bool point_in_polygon(const std::vector<Point>& ring, const Point& p);

/// Shoelace area; positive for counterclockwise rings in a y-up frame.
double signed_area(const std::vector<Point>& ring);

/// x coordinates where the closed ring crosses the horizontal line at y,
/// sorted ascending. Uses the same half-open edge rule as point_in_polygon.
std::vector<double> scanline_crossings(const std::vector<Point>& ring, double y);

bool self_intersects(const std::vector<Point>& ring);

struct PathProjection {
  double distance = 0.0;
  /// Distance signed by the side of travel: positive where the 2-D cross
  /// product of the local direction and (p - nearest) is positive.
  double signed_distance = 0.0;
  Point nearest = Point::Zero();
};

PathProjection project_onto(const Polyline& path, const Point& p);

inline double distance_to(const Polyline& path, const Point& p) { return project_onto(path, p).distance; }

}  // namespace cellscape
