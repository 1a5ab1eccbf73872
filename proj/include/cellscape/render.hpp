#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cellscape/density.hpp"
#include "cellscape/population.hpp"

namespace cellscape {

/// Piecewise-linear RGB ramp over [0, 1].
struct Colormap {
  struct Stop {
    double t;
    Eigen::Vector3d rgb;  // components in [0, 1]
  };

  std::string name;
  std::vector<Stop> stops;

  /// Throws invalid_input unless stops start at 0, end at 1 and increase strictly.
  void validate() const;
  /// Input is clamped to [0, 1]; NaN maps to 0.
  Rgba operator()(double t) const;

  /// Default five-stop perceptual ramp (dark violet to yellow).
  static Colormap viridis();
  static Colormap grayscale();
};

/// Per-cell colormap lookups.
std::vector<Rgba> map_colors(const Eigen::VectorXd& values, const Colormap& colormap);

/// Distinct random hues keyed by cell index, stable under reordering of the calls.
std::vector<Rgba> random_colors(Eigen::Index n, std::uint64_t seed);

/// Min-max normalisation to [0, 1]; a constant vector maps to 0.5.
Eigen::VectorXd normalize(const Eigen::VectorXd& values);

enum class DiscMode { color, radius };

struct DiscOptions {
  DiscMode mode = DiscMode::color;
  /// Pixels per domain unit.
  double scale = 1.0;
  /// Disc radius in domain units; 0 picks 0.4 of the mean cell spacing.
  double radius = 0.0;
  Rgba background{255, 255, 255, 255};
};

/// Image size for a population rendered at a scale: ceil(W s) x ceil(H s).
std::pair<int, int> render_size(const Population& pop, double scale);

/// Colored discs composited in cell order with 4x4 supersampled coverage. In
/// radius mode the radius is proportional to the value and the color is the
/// colormap's value at 1.
RasterImage render_discs(const Population& pop, const std::vector<Rgba>& colors, const Eigen::VectorXd& values,
                         const DiscOptions& options = {});
RasterImage render_discs(const Population& pop, const Eigen::VectorXd& values, const Colormap& colormap,
                         const DiscOptions& options = {});

struct VoronoiOptions {
  double scale = 1.0;
  bool borders = false;
  Rgba border{0, 0, 0, 255};
};

/// Every pixel takes the color of its nearest cell (labels from rasterize_voronoi
/// on positions * scale). Borders mark pixels whose right or lower neighbour differs.
RasterImage render_voronoi(const Population& pop, const std::vector<Rgba>& colors, const VoronoiOptions& options = {});
RasterImage render_voronoi(const Population& pop, const Eigen::VectorXd& values, const Colormap& colormap,
                           const VoronoiOptions& options = {});

/// Catmull-Rom (a = -0.5) resampling with clamp-to-edge. Output node (i, j) sits
/// at source coordinate (i / factor, j / factor), so the result is
/// ((rows - 1) factor + 1) x ((cols - 1) factor + 1).
Eigen::MatrixXd upsample_bicubic(const Eigen::MatrixXd& grid, int factor);

/// Colormapped image of a grid (row 0 at the top), upsampled by factor.
RasterImage render_grid(const Eigen::MatrixXd& grid, const Colormap& colormap, int factor = 1);

enum class RenderStyle { discs, voronoi, histogram };

/// Parses "discs", "voronoi" or "histogram"; throws invalid_parameter otherwise.
RenderStyle parse_render_style(const std::string& name);

struct RenderRequest {
  RenderStyle style = RenderStyle::discs;
  double scale = 1.0;
  int bins = 32;
  int upsample = 8;
  /// Empty selects per-cell random colors (discs and voronoi only).
  std::optional<Colormap> colormap = Colormap::viridis();
  bool borders = false;
  DiscMode mode = DiscMode::color;
  double radius = 0.0;
  /// Min-max normalise values (or histogram means) before the colormap.
  bool normalize = true;
  std::uint64_t seed = 0;
};

/// One of the three figure styles. Without values every cell carries 1.
RasterImage render_population(const Population& pop, const Eigen::VectorXd* values, const RenderRequest& request);

}  // namespace cellscape
