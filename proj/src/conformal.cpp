#include "cellscape/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "cellscape/spline.hpp"

namespace cellscape {

namespace {

constexpr Complex I(0.0, 1.0);
constexpr double kTwoPi = 2.0 * M_PI;

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

void validate(const BoundaryCurve& c) {
  if (c.size() < 64) throw Error(ErrorCode::invalid_parameter, "boundary needs at least 64 nodes");
  if (c.dz.size() != c.size()) throw Error(ErrorCode::invalid_input, "boundary nodes and derivatives differ in count");
  for (Eigen::Index j = 0; j < c.size(); ++j)
    if (!(std::abs(c.dz[j]) > 0.0) || !std::isfinite(std::abs(c.z[j])))
      throw Error(ErrorCode::invalid_input, "boundary derivative vanishes at node " + std::to_string(j));
  double area = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) area += cross(c.z[j], c.dz[j]);
  if (!(area > 0.0)) throw Error(ErrorCode::invalid_input, "boundary must be counterclockwise");
}

}  // namespace

BoundaryCurve BoundaryCurve::from_function(const std::function<Complex(double)>& z,
                                           const std::function<Complex(double)>& dz, Eigen::Index m) {
  BoundaryCurve c{Eigen::VectorXcd(m), Eigen::VectorXcd(m)};
  for (Eigen::Index j = 0; j < m; ++j) {
    const double t = kTwoPi * double(j) / double(m);
    c.z[j] = z(t);
    c.dz[j] = dz(t);
  }
  return c;
}

BoundaryCurve BoundaryCurve::ellipse(double a, double b, Eigen::Index m, Complex center) {
  return from_function([=](double t) { return center + Complex(a * std::cos(t), b * std::sin(t)); },
                       [=](double t) { return Complex(-a * std::sin(t), b * std::cos(t)); }, m);
}

BoundaryCurve BoundaryCurve::spline(const std::vector<Point>& control, Eigen::Index m) {
  std::vector<Point> pts = control;
  if (signed_area(pts) < 0) std::reverse(pts.begin(), pts.end());
  const PeriodicSpline s(pts);
  const double length = s.length();
  BoundaryCurve c{Eigen::VectorXcd(m), Eigen::VectorXcd(m)};
  for (Eigen::Index j = 0; j < m; ++j) {
    const double t = s.parameter_at(length * double(j) / double(m));
    const Point p = s.value(t);
    const Point tangent = s.derivative(t).normalized() * (length / kTwoPi);
    c.z[j] = Complex(p.x(), p.y());
    c.dz[j] = Complex(tangent.x(), tangent.y());
  }
  return c;
}

DiscMap::DiscMap(BoundaryCurve curve, Complex base_point, Eigen::VectorXcd szego, double rcond)
    : curve_(std::move(curve)), a_(base_point), szego_(std::move(szego)), rcond_(rcond) {
  const Eigen::Index m = curve_.size();
  const double h = kTwoPi / double(m);
  ring_.reserve(m);
  for (Eigen::Index j = 0; j < m; ++j) ring_.emplace_back(curve_.z[j].real(), curve_.z[j].imag());
  for (Eigen::Index j = 0; j < m; ++j) spacing_ = std::max(spacing_, std::abs(curve_.z[(j + 1) % m] - curve_.z[j]));

  boundary_.resize(m);
  quotient_.resize(m);
  double norm2 = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Complex s = szego_[j];
    const Complex tangent = curve_.dz[j] / std::abs(curve_.dz[j]);
    boundary_[j] = -I * tangent * s * s / std::norm(s);
    quotient_[j] = boundary_[j] / (curve_.z[j] - a_);
    norm2 += std::norm(s) * std::abs(curve_.dz[j]) * h;
  }
  saa_ = cauchy(szego_, a_).real();
  residual_ = std::abs(norm2 - saa_) / std::abs(saa_);
}

bool DiscMap::contains(Complex z) const { return point_in_polygon(ring_, Point(z.real(), z.imag())); }

double DiscMap::boundary_distance(Complex z) const {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < curve_.size(); ++j) best = std::min(best, std::abs(curve_.z[j] - z));
  return best;
}

// Barycentric form of the trapezoid Cauchy integral: both sums share the
// near-singular weights, so their ratio stays accurate close to the boundary.
Complex DiscMap::cauchy(const Eigen::VectorXcd& values, Complex z) const {
  Complex num = 0.0, den = 0.0;
  for (Eigen::Index j = 0; j < curve_.size(); ++j) {
    const Complex d = curve_.z[j] - z;
    if (d == 0.0) return values[j];
    const Complex w = curve_.dz[j] / d;
    num += w * values[j];
    den += w;
  }
  return num / den;
}

Complex DiscMap::operator()(Complex z) const { return (z - a_) * cauchy(quotient_, z); }

Complex DiscMap::szego(Complex z) const { return cauchy(szego_, z); }

Complex DiscMap::derivative(Complex z) const {
  const Complex s = szego(z);
  return kTwoPi * s * s / saa_;
}

Complex DiscMap::inverse(Complex w, Complex seed) const {
  Complex z = seed;
  Complex r = (*this)(z) - w;
  for (int iter = 0; iter < 50; ++iter) {
    if (std::abs(r) <= 1e-10) return z;
    const Complex step = r / derivative(z);
    double damping = 1.0;
    for (int k = 0; k < 30; ++k, damping *= 0.5) {
      const Complex candidate = z - damping * step;
      if (!contains(candidate)) continue;
      const Complex rc = (*this)(candidate)-w;
      if (std::abs(rc) < std::abs(r) || k == 29) {
        z = candidate;
        r = rc;
        break;
      }
    }
  }
  if (std::abs(r) <= 1e-10) return z;
  std::ostringstream msg;
  msg << "Newton inversion did not converge for w = (" << w.real() << ", " << w.imag() << "); residual "
      << std::abs(r);
  throw Error(ErrorCode::inversion_failure, msg.str());
}

DiscMap szego_map(const BoundaryCurve& curve, Complex z0, double min_rcond) {
  validate(curve);
  const Eigen::Index m = curve.size();
  {
    std::vector<Point> ring;
    for (Eigen::Index j = 0; j < m; ++j) ring.emplace_back(curve.z[j].real(), curve.z[j].imag());
    double spacing = 0.0, nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      spacing = std::max(spacing, std::abs(curve.z[(j + 1) % m] - curve.z[j]));
      nearest = std::min(nearest, std::abs(curve.z[j] - z0));
    }
    if (!point_in_polygon(ring, Point(z0.real(), z0.imag())) || nearest < 1e-3 * spacing)
      throw Error(ErrorCode::invalid_basepoint, "base point is not strictly inside the boundary");
  }

  const double h = kTwoPi / double(m);
  Eigen::VectorXcd tangent(m);
  Eigen::VectorXd weight(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double speed = std::abs(curve.dz[j]);
    tangent[j] = curve.dz[j] / speed;
    weight[j] = std::sqrt(speed * h);
  }
  // Cauchy kernel H(w, z) = T(z) / (2 pi i (z - w)); Kerzman-Stein kernel
  // A(w, z) = H(w, z) - conj(H(z, w)), which vanishes on the diagonal.
  auto cauchy_kernel = [&](Complex w, Eigen::Index k) { return tangent[k] / (kTwoPi * I * (curve.z[k] - w)); };

  // Boundary equation S - integral A(., w) S(w) ds_w = conj(H(z0, .)) in
  // symmetrized Nystrom form (I - W A W) x = W g with x = W S, so the matrix
  // is the identity plus a skew-Hermitian part.
  Eigen::MatrixXcd system = Eigen::MatrixXcd::Identity(m, m);
  Eigen::VectorXcd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    rhs[i] = weight[i] * std::conj(cauchy_kernel(z0, i));
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const Complex aij = cauchy_kernel(curve.z[i], j) - std::conj(cauchy_kernel(curve.z[j], i));
      system(i, j) = -weight[i] * aij * weight[j];
      system(j, i) = -std::conj(system(i, j));
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond >= min_rcond)) {
    std::ostringstream msg;
    msg << "Szego system is ill-conditioned: reciprocal condition " << rcond << " < " << min_rcond << " at m = " << m;
    throw Error(ErrorCode::numerical_failure, msg.str());
  }
  const Eigen::VectorXcd x = lu.solve(rhs);
  Eigen::VectorXcd s = x.cwiseQuotient(weight.cast<Complex>());
  return DiscMap(curve, z0, std::move(s), rcond);
}

std::vector<Complex> evaluate(const DiscMap& map, const std::vector<Complex>& points, Warnings* warnings) {
  std::vector<Complex> out;
  out.reserve(points.size());
  std::size_t near = 0;
  for (const Complex& p : points) {
    if (map.boundary_distance(p) < map.node_spacing()) ++near;
    out.push_back(map(p));
  }
  if (near > 0 && warnings)
    warnings->push_back(std::to_string(near) + " evaluation point(s) lie within one node spacing of the boundary; "
                        "accuracy is reduced there");
  return out;
}

namespace {

// Pulls a disc polyline back into the region. The first sample is reached
// by continuation along the segment from the origin.
void pull_back(const DiscMap& map, GridLine& line) {
  Complex z = map.base_point();
  const Complex first = line.disc.front();
  const int approach = std::max(1, static_cast<int>(std::ceil(std::abs(first) / 0.05)));
  for (int k = 1; k <= approach; ++k) z = map.inverse(first * (double(k) / approach), z);
  line.region.reserve(line.disc.size());
  for (const Complex& w : line.disc) {
    // Substeps keep the Newton seed inside the basin on coarse lines.
    const Complex from = line.region.empty() ? w : map(z);
    const int sub = line.region.empty() ? 1 : std::max(1, static_cast<int>(std::ceil(std::abs(w - from) / 0.05)));
    for (int k = 1; k <= sub; ++k) z = map.inverse(from + (w - from) * (double(k) / sub), z);
    line.region.push_back(z);
  }
}

}  // namespace

std::vector<GridLine> map_grid(const DiscMap& map, GridFamily family, int lines, int samples_per_line) {
  if (lines < 1) throw Error(ErrorCode::invalid_parameter, "grid needs at least one line");
  if (samples_per_line < 2) throw Error(ErrorCode::invalid_parameter, "grid lines need at least two samples");
  std::vector<GridLine> grid;
  const double outer = (lines + 0.5) / (lines + 1.0);
  if (family == GridFamily::polar) {
    for (int k = 1; k <= lines; ++k) {
      GridLine line{"circle", double(k) / (lines + 1), {}, {}};
      for (int s = 0; s <= samples_per_line; ++s)
        line.disc.push_back(std::polar(line.level, kTwoPi * s / samples_per_line));
      grid.push_back(std::move(line));
    }
    for (int k = 0; k < lines; ++k) {
      GridLine line{"ray", kTwoPi * k / lines, {}, {}};
      for (int s = 0; s < samples_per_line; ++s)
        line.disc.push_back(std::polar(outer * s / (samples_per_line - 1), line.level));
      grid.push_back(std::move(line));
    }
  } else {
    const double radius = 0.95;
    for (const char* kind : {"horizontal", "vertical"}) {
      for (int k = 1; k <= lines; ++k) {
        const double c = -radius + 2.0 * radius * k / (lines + 1);
        const double half = std::sqrt(radius * radius - c * c);
        GridLine line{kind, c, {}, {}};
        for (int s = 0; s < samples_per_line; ++s) {
          const double t = -half + 2.0 * half * s / (samples_per_line - 1);
          line.disc.push_back(kind[0] == 'h' ? Complex(t, c) : Complex(c, t));
        }
        grid.push_back(std::move(line));
      }
    }
  }
  for (GridLine& line : grid) pull_back(map, line);
  return grid;
}

DiscMap polygon_map(const Polyline& outline, Eigen::Index m, std::optional<Complex> z0) {
  if (outline.points.size() < 3) throw Error(ErrorCode::invalid_input, "shape outline needs at least 3 points");
  constexpr int samples = 128;
  Polyline ring{outline.points, true};
  std::vector<Point> control;
  control.reserve(samples);
  for (int k = 0; k < samples; ++k) control.push_back(ring.point_at(static_cast<double>(k) / samples));
  if (!z0) {
    const double area = signed_area(ring.points);
    if (area == 0.0) throw Error(ErrorCode::invalid_input, "shape outline has zero area");
    Point c = Point::Zero();
    const std::size_t n = ring.points.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = ring.points[j];
      const Point& b = ring.points[i];
      c += (a + b) * (a.x() * b.y() - b.x() * a.y());
    }
    c /= 6.0 * area;
    z0 = Complex(c.x(), c.y());
  }
  return szego_map(BoundaryCurve::spline(control, m), *z0);
}

}  // namespace cellscape
