#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cellscape/error.hpp"
#include "cellscape/geometry.hpp"

namespace cellscape {

using Complex = std::complex<double>;

/// m counterclockwise boundary samples z(t_j) and z'(t_j) at t_j = 2 pi j / m.
struct BoundaryCurve {
  Eigen::VectorXcd z;
  Eigen::VectorXcd dz;

  Eigen::Index size() const { return z.size(); }

  static BoundaryCurve from_function(const std::function<Complex(double)>& z, const std::function<Complex(double)>& dz,
                                     Eigen::Index m);
  static BoundaryCurve ellipse(double a, double b, Eigen::Index m, Complex center = 0.0);
  /// Closed cubic spline through the points, resampled uniformly in arclength.
  static BoundaryCurve spline(const std::vector<Point>& control, Eigen::Index m);
};

/// Riemann map f of the region onto the unit disc with f(z0) = 0, f'(z0) > 0,
/// built from the Szego kernel S(z, z0) on the boundary.
class DiscMap {
 public:
  DiscMap(BoundaryCurve curve, Complex base_point, Eigen::VectorXcd szego, double rcond);

  Complex base_point() const { return a_; }
  const BoundaryCurve& curve() const { return curve_; }
  /// S(z_j, z0) at the boundary nodes.
  const Eigen::VectorXcd& szego_values() const { return szego_; }
  /// f(z_j), all of unit modulus.
  const Eigen::VectorXcd& boundary_values() const { return boundary_; }
  /// S(z0, z0), real and positive.
  double szego_at_base() const { return saa_; }
  /// f'(z0) = 2 pi S(z0, z0).
  double derivative_at_base() const { return 2.0 * M_PI * saa_; }
  double reciprocal_condition() const { return rcond_; }
  /// Largest boundary distance between consecutive nodes.
  double node_spacing() const { return spacing_; }
  /// Relative gap between S(z0, z0) from the Cauchy integral and from the
  /// reproducing identity S(z0, z0) = integral of |S(z, z0)|^2 ds.
  double reproducing_residual() const { return residual_; }

  bool contains(Complex z) const;
  double boundary_distance(Complex z) const;
  Complex operator()(Complex z) const;
  Complex derivative(Complex z) const;
  Complex szego(Complex z) const;
  /// Damped Newton solve of f(z) = w started from seed.
  Complex inverse(Complex w, Complex seed) const;

 private:
  Complex cauchy(const Eigen::VectorXcd& values, Complex z) const;

  BoundaryCurve curve_;
  Complex a_;
  Eigen::VectorXcd szego_;
  Eigen::VectorXcd boundary_;
  Eigen::VectorXcd quotient_;  // f(z_j) / (z_j - z0)
  std::vector<Point> ring_;
  double saa_ = 0.0;
  double rcond_ = 0.0;
  double spacing_ = 0.0;
  double residual_ = 0.0;
};

/// Nystrom solution of the Kerzman-Stein equation with the trapezoid rule on
/// the curve's nodes. Throws invalid_basepoint when z0 is not interior and
/// numerical_failure when the reciprocal condition falls below min_rcond.
DiscMap szego_map(const BoundaryCurve& curve, Complex z0, double min_rcond = 1e-12);

/// f at interior points; points within one node spacing of the boundary add
/// a warning.
std::vector<Complex> evaluate(const DiscMap& map, const std::vector<Complex>& points, Warnings* warnings = nullptr);

enum class GridFamily { polar, cartesian };

struct GridLine {
  std::string kind;  // circle, ray, horizontal, vertical
  double level = 0.0;  // radius, angle or chord offset in the disc
  std::vector<Complex> disc;
  std::vector<Complex> region;
};

/// Reference grid in the disc pulled back into the region. Polar: circles of
/// radius k / (lines + 1) and `lines` rays; cartesian: `lines` chords in each
/// direction clipped to radius 0.95.
std::vector<GridLine> map_grid(const DiscMap& map, GridFamily family, int lines, int samples_per_line);

/// Map of the region bounded by a closed polygon: the outline is resampled to
/// 128 equally spaced points and interpolated by a periodic spline with m
/// nodes. The base point defaults to the polygon's area centroid.
DiscMap polygon_map(const Polyline& outline, Eigen::Index m, std::optional<Complex> z0 = std::nullopt);

}  // namespace cellscape
