#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "cellscape/geometry.hpp"

namespace cellscape {

/// Closed interpolating cubic spline (C2, periodic) through control points,
/// parameterized by cumulative chord length.
class PeriodicSpline {
 public:
  explicit PeriodicSpline(const std::vector<Point>& control);

  double period() const { return knots_.back(); }
  Point value(double t) const;
  Point derivative(double t) const;
  /// Arclength from parameter 0 to t, t in [0, period].
  double arclength(double t) const;
  double length() const { return cumulative_.back(); }
  /// Parameter whose arclength from 0 equals s.
  double parameter_at(double s) const;

 private:
  std::size_t segment(double t) const;
  double segment_arclength(std::size_t i, double t0, double t1) const;

  std::vector<Point> points_;  // control points
  std::vector<Point> second_;  // second derivatives at knots
  std::vector<double> knots_;  // size n + 1, knots_[0] = 0
  std::vector<double> cumulative_;
};

}  // namespace cellscape
