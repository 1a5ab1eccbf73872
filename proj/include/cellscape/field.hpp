#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "cellscape/population.hpp"
#include "cellscape/random.hpp"

namespace cellscape {

/// Difference-of-Gaussians lateral kernel.
struct DogKernel {
  double excitatory_amplitude = 1.0;
  double excitatory_width = 0.05;
  double inhibitory_amplitude = 0.75;
  double inhibitory_width = 0.15;

  double operator()(double distance) const;
};

enum class RateFunction { rectify, sigmoid, identity };

/// Widths given directly in position units, or as fractions of the domain width.
enum class KernelUnits { absolute, domain };

struct FieldParams {
  double tau = 0.1;
  double dt = 0.01;
  double h = 0.0;
  DogKernel dog;
  KernelUnits units = KernelUnits::absolute;
  double input_mean = 0.35;
  double input_noise = 0.05;
  RateFunction rate = RateFunction::rectify;
  double slope = 1.0;
  double offset = 0.0;
  bool weight_scale = true;

  double rate_of(double u) const;
  /// Kernel with widths converted to position units for a domain of this width.
  DogKernel kernel_for(double domain_width) const;
};

/// Throws invalid_parameter when an invariant of FieldParams fails.
void validate(const FieldParams& params);

struct FieldState {
  Eigen::VectorXd u;
  double t = 0.0;
  std::uint64_t steps = 0;
  Rng rng{0};
};

FieldState initial_state(Eigen::Index n, std::uint64_t seed);

/// W_ij = dog(|p_i - p_j|), optionally divided by n. The diagonal carries dog(0).
template <typename Derived>
Eigen::MatrixXd build_weights(const Eigen::MatrixBase<Derived>& points, const DogKernel& dog, bool weight_scale) {
  const Eigen::Index n = points.cols();
  const double scale = weight_scale && n > 0 ? 1.0 / static_cast<double>(n) : 1.0;
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double v = scale * dog((points.col(i) - points.col(j)).norm());
      w(i, j) = v;
      w(j, i) = v;
    }
  }
  return w;
}

/// Throws invalid_input for an empty population.
Eigen::MatrixXd build_weights(const Population& pop, const FieldParams& params);

/// One explicit Euler step. Throws divergence (naming the step) if u leaves the finite range.
void step(FieldState& state, const Eigen::MatrixXd& w, const FieldParams& params);

struct SimulationResult {
  FieldState state;
  /// Per-cell mean of f(u) over the last 20% of steps.
  Eigen::VectorXd mean_activity;
};

SimulationResult simulate(const Eigen::MatrixXd& w, const FieldParams& params, std::uint64_t steps,
                          std::uint64_t seed);
SimulationResult simulate(const Population& pop, const FieldParams& params, std::uint64_t steps, std::uint64_t seed);

/// Number of trailing steps averaged by simulate.
std::uint64_t averaging_window(std::uint64_t steps);

struct ActivityHistogram {
  /// by x bx grids, row = y bin.
  Eigen::MatrixXd means;
  Eigen::MatrixXi counts;
  /// True where the bin received no cell.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> empty;
};

ActivityHistogram activity_histogram(const Population& pop, const Eigen::VectorXd& values, int bx, int by);

/// Radially averaged autocorrelation of the mean-subtracted grid, zero padded
/// (no wraparound), normalised to 1 at the origin. Entry r averages lags with
/// round(|lag|) == r, for r < min(rows, cols) / 2.
std::vector<double> radial_autocorrelation(const Eigen::MatrixXd& grid);

struct AutocorrelationPeak {
  bool found = false;
  int radius = 0;
  double value = 0.0;
};

/// Highest positive local maximum of the radial profile away from the origin
/// lobe, i.e. after the profile has first stopped decreasing.
AutocorrelationPeak secondary_peak(const std::vector<double>& radial);

}  // namespace cellscape
