#include "cellscape/spline.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "cellscape/error.hpp"

namespace cellscape {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1].
constexpr double kGaussX[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
constexpr double kGaussW[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
constexpr int kSubintervals = 8;

}  // namespace

PeriodicSpline::PeriodicSpline(const std::vector<Point>& control) {
  for (const Point& p : control)
    if (points_.empty() || p != points_.back()) points_.push_back(p);
  while (points_.size() > 1 && points_.front() == points_.back()) points_.pop_back();
  const std::size_t n = points_.size();
  if (n < 3) throw Error(ErrorCode::invalid_input, "a closed spline needs at least three distinct points");

  knots_.assign(n + 1, 0.0);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = (points_[(i + 1) % n] - points_[i]).norm();
    knots_[i + 1] = knots_[i] + h[i];
  }

  // Cyclic tridiagonal system for the knot second derivatives.
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::MatrixX2d rhs(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t prev = (i + n - 1) % n, next = (i + 1) % n;
    const double hp = h[prev], hn = h[i];
    entries.emplace_back(i, prev, hp);
    entries.emplace_back(i, i, 2.0 * (hp + hn));
    entries.emplace_back(i, next, hn);
    rhs.row(i) = (6.0 * ((points_[next] - points_[i]) / hn - (points_[i] - points_[prev]) / hp)).transpose();
  }
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(a);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::numerical_failure, "spline system is singular");
  const Eigen::MatrixX2d m = solver.solve(rhs);
  second_.resize(n);
  for (std::size_t i = 0; i < n; ++i) second_[i] = m.row(i).transpose();

  cumulative_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cumulative_[i + 1] = cumulative_[i] + segment_arclength(i, knots_[i], knots_[i + 1]);
}

std::size_t PeriodicSpline::segment(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - knots_.begin() - 1));
  return std::min(i, points_.size() - 1);
}

Point PeriodicSpline::value(double t) const {
  t = std::fmod(t, period());
  if (t < 0) t += period();
  const std::size_t i = segment(t), j = (i + 1) % points_.size();
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - t) / h, b = 1.0 - a;
  return a * points_[i] + b * points_[j] + ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[j]) * (h * h / 6.0);
}

Point PeriodicSpline::derivative(double t) const {
  t = std::fmod(t, period());
  if (t < 0) t += period();
  const std::size_t i = segment(t), j = (i + 1) % points_.size();
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - t) / h, b = 1.0 - a;
  return (points_[j] - points_[i]) / h - (3 * a * a - 1) / 6.0 * h * second_[i] + (3 * b * b - 1) / 6.0 * h * second_[j];
}

double PeriodicSpline::segment_arclength(std::size_t, double t0, double t1) const {
  double total = 0.0;
  const double step = (t1 - t0) / kSubintervals;
  for (int k = 0; k < kSubintervals; ++k) {
    const double mid = t0 + (k + 0.5) * step;
    for (int g = 0; g < 5; ++g) total += kGaussW[g] * 0.5 * step * derivative(mid + 0.5 * step * kGaussX[g]).norm();
  }
  return total;
}

double PeriodicSpline::arclength(double t) const {
  t = std::clamp(t, 0.0, period());
  const std::size_t i = segment(t);
  return cumulative_[i] + segment_arclength(i, knots_[i], t);
}

double PeriodicSpline::parameter_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t i = std::min<std::size_t>(points_.size() - 1, static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - cumulative_.begin() - 1)));
  // Newton on the arclength within segment i, safeguarded by bisection.
  double lo = knots_[i], hi = knots_[i + 1];
  double t = lo + (hi - lo) * (s - cumulative_[i]) / std::max(cumulative_[i + 1] - cumulative_[i], 1e-300);
  for (int iter = 0; iter < 60; ++iter) {
    const double f = cumulative_[i] + segment_arclength(i, knots_[i], t) - s;
    if (std::abs(f) <= 1e-13 * std::max(1.0, length())) break;
    if (f > 0) hi = t; else lo = t;
    const double speed = derivative(t).norm();
    double next = speed > 0 ? t - f / speed : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

}  // namespace cellscape
