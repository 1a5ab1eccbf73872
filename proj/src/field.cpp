#include "cellscape/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cellscape/error.hpp"
#include "cellscape/parallel.hpp"

namespace cellscape {

double DogKernel::operator()(double distance) const {
  const double d2 = distance * distance;
  return excitatory_amplitude * std::exp(-d2 / (2.0 * excitatory_width * excitatory_width)) -
         inhibitory_amplitude * std::exp(-d2 / (2.0 * inhibitory_width * inhibitory_width));
}

double FieldParams::rate_of(double u) const {
  switch (rate) {
    case RateFunction::rectify:
      return u > 0.0 ? u : 0.0;
    case RateFunction::sigmoid:
      return 1.0 / (1.0 + std::exp(-slope * (u - offset)));
    case RateFunction::identity:
      break;
  }
  return u;
}

DogKernel FieldParams::kernel_for(double domain_width) const {
  DogKernel k = dog;
  if (units == KernelUnits::domain) {
    k.excitatory_width *= domain_width;
    k.inhibitory_width *= domain_width;
  }
  return k;
}

void validate(const FieldParams& p) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_parameter, "field: " + what); };
  if (!(p.tau > 0.0)) fail("tau must be positive");
  if (!(p.dt > 0.0)) fail("dt must be positive");
  if (!(p.dt / p.tau <= 0.5)) fail("dt/tau must not exceed 0.5");
  if (!(p.dog.excitatory_width > 0.0)) fail("sigma_e must be positive");
  if (!(p.dog.excitatory_width < p.dog.inhibitory_width)) fail("sigma_e must be smaller than sigma_i");
  if (!(p.input_noise >= 0.0)) fail("input_noise must be non-negative");
  if (!std::isfinite(p.h) || !std::isfinite(p.input_mean)) fail("h and input_mean must be finite");
  if (p.rate == RateFunction::sigmoid && !std::isfinite(p.slope)) fail("sigmoid slope must be finite");
}

FieldState initial_state(Eigen::Index n, std::uint64_t seed) {
  FieldState s;
  s.u = Eigen::VectorXd::Zero(n);
  s.rng = Rng(derive_seed({seed, 0x6669656c64ULL}));
  return s;
}

Eigen::MatrixXd build_weights(const Population& pop, const FieldParams& params) {
  if (pop.size() == 0) throw Error(ErrorCode::invalid_input, "field: population is empty");
  return build_weights(pop.positions(), params.kernel_for(pop.width), params.weight_scale);
}

void step(FieldState& state, const Eigen::MatrixXd& w, const FieldParams& params) {
  const Eigen::Index n = state.u.size();
  if (w.rows() != n || w.cols() != n)
    throw Error(ErrorCode::invalid_input, "field: weight matrix is " + std::to_string(w.rows()) + "x" +
                                              std::to_string(w.cols()) + " for " + std::to_string(n) + " cells");

  Eigen::VectorXd input(n);
  for (Eigen::Index i = 0; i < n; ++i)
    input[i] = params.input_noise > 0.0
                   ? params.input_mean + state.rng.uniform(-params.input_noise, params.input_noise)
                   : params.input_mean;

  const Eigen::VectorXd rate = state.u.unaryExpr([&](double u) { return params.rate_of(u); });
  // W is symmetric, so row i is column i and each entry is one contiguous dot product.
  Eigen::VectorXd lateral(n);
  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) lateral[i] = w.col(i).dot(rate);
  });

  state.u += (params.dt / params.tau) * (-state.u + lateral + input + Eigen::VectorXd::Constant(n, params.h));
  state.t += params.dt;
  ++state.steps;
  if (!state.u.allFinite())
    throw Error(ErrorCode::divergence, "field: activity diverged at step " + std::to_string(state.steps));
}

std::uint64_t averaging_window(std::uint64_t steps) { return std::max<std::uint64_t>(1, (steps + 4) / 5); }

SimulationResult simulate(const Eigen::MatrixXd& w, const FieldParams& params, std::uint64_t steps,
                          std::uint64_t seed) {
  validate(params);
  if (steps < 1) throw Error(ErrorCode::invalid_parameter, "field: steps must be at least 1");
  SimulationResult out{initial_state(w.rows(), seed), Eigen::VectorXd::Zero(w.rows())};
  const std::uint64_t first_recorded = steps - averaging_window(steps);
  for (std::uint64_t s = 0; s < steps; ++s) {
    step(out.state, w, params);
    if (s >= first_recorded) out.mean_activity += out.state.u.unaryExpr([&](double u) { return params.rate_of(u); });
  }
  out.mean_activity /= static_cast<double>(averaging_window(steps));
  return out;
}

SimulationResult simulate(const Population& pop, const FieldParams& params, std::uint64_t steps, std::uint64_t seed) {
  validate(params);
  return simulate(build_weights(pop, params), params, steps, seed);
}

ActivityHistogram activity_histogram(const Population& pop, const Eigen::VectorXd& values, int bx, int by) {
  if (bx < 1 || by < 1) throw Error(ErrorCode::invalid_parameter, "histogram: bin counts must be at least 1");
  if (values.size() != pop.size())
    throw Error(ErrorCode::invalid_input, "histogram: " + std::to_string(values.size()) + " values for " +
                                              std::to_string(pop.size()) + " cells");
  ActivityHistogram h;
  h.means = Eigen::MatrixXd::Zero(by, bx);
  h.counts = Eigen::MatrixXi::Zero(by, bx);
  const double w = pop.width > 0.0 ? pop.width : 1.0;
  const double ht = pop.height > 0.0 ? pop.height : 1.0;
  for (Eigen::Index i = 0; i < pop.size(); ++i) {
    const Point& p = pop.cells[i].position;
    const int x = std::clamp(static_cast<int>(std::floor(p.x() / w * bx)), 0, bx - 1);
    const int y = std::clamp(static_cast<int>(std::floor(p.y() / ht * by)), 0, by - 1);
    h.means(y, x) += values[i];
    ++h.counts(y, x);
  }
  h.empty = (h.counts.array() == 0);
  h.means = (h.counts.array() > 0).select(h.means.array() / h.counts.cast<double>().array().max(1.0), 0.0);
  return h;
}

std::vector<double> radial_autocorrelation(const Eigen::MatrixXd& grid) {
  const Eigen::Index rows = grid.rows(), cols = grid.cols();
  const Eigen::MatrixXd g = grid.array() - grid.mean();
  const int bins = static_cast<int>(std::min(rows, cols) / 2);
  std::vector<double> sum(bins, 0.0);
  std::vector<int> count(bins, 0);
  const double zero_lag = g.squaredNorm();
  for (Eigen::Index dy = -(rows - 1); dy < rows; ++dy) {
    for (Eigen::Index dx = -(cols - 1); dx < cols; ++dx) {
      const int r = static_cast<int>(std::lround(std::hypot(double(dx), double(dy))));
      if (r >= bins) continue;
      const Eigen::Index y0 = std::max<Eigen::Index>(0, -dy), y1 = std::min(rows, rows - dy);
      const Eigen::Index x0 = std::max<Eigen::Index>(0, -dx), x1 = std::min(cols, cols - dx);
      const double c = (g.block(y0, x0, y1 - y0, x1 - x0).array() *
                        g.block(y0 + dy, x0 + dx, y1 - y0, x1 - x0).array())
                           .sum();
      sum[r] += zero_lag > 0.0 ? c / zero_lag : 0.0;
      ++count[r];
    }
  }
  std::vector<double> out(bins);
  for (int r = 0; r < bins; ++r) out[r] = count[r] ? sum[r] / count[r] : 0.0;
  return out;
}

AutocorrelationPeak secondary_peak(const std::vector<double>& radial) {
  AutocorrelationPeak best;
  const std::size_t n = radial.size();
  std::size_t r = 1;
  while (r < n && radial[r] < radial[r - 1]) ++r;
  for (; r + 1 < n; ++r) {
    if (radial[r] > 0.0 && radial[r] >= radial[r - 1] && radial[r] >= radial[r + 1] &&
        (!best.found || radial[r] > best.value)) {
      best = {true, static_cast<int>(r), radial[r]};
    }
  }
  return best;
}

}  // namespace cellscape
