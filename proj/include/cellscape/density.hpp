#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace cellscape {

/// Structure identity packed from a pixel's RGB bytes.
using Identity = std::uint32_t;

constexpr Identity pack_identity(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  return 65536u * r + 256u * g + b;
}

template <typename T>
using RowMajorArray = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 0;
  friend bool operator==(const Rgba&, const Rgba&) = default;
};

static_assert(sizeof(Rgba) == 4);

/// 8-bit RGBA raster, row-major from the top-left corner.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<Rgba> pixels;

  RasterImage() = default;
  RasterImage(int w, int h, Rgba fill = {}) : width(w), height(h), pixels(std::size_t(w) * h, fill) {}

  Rgba& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }
  const Rgba& at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
};

/// Per-pixel density in [0,1]; rho(y, x). One pixel is the area element.
struct DensityMap {
  RowMajorArray<double> rho;

  DensityMap() = default;
  explicit DensityMap(RowMajorArray<double> values) : rho(std::move(values)) {}
  DensityMap(int width, int height, double fill = 0.0) : rho(RowMajorArray<double>::Constant(height, width, fill)) {}

  int width() const { return static_cast<int>(rho.cols()); }
  int height() const { return static_cast<int>(rho.rows()); }
  double mass() const { return rho.sum(); }
};

struct IdentityMap {
  RowMajorArray<Identity> id;

  IdentityMap() = default;
  explicit IdentityMap(RowMajorArray<Identity> values) : id(std::move(values)) {}
  IdentityMap(int width, int height, Identity fill = 0) : id(RowMajorArray<Identity>::Constant(height, width, fill)) {}

  int width() const { return static_cast<int>(id.cols()); }
  int height() const { return static_cast<int>(id.rows()); }
};

struct DecodedMaps {
  DensityMap density;
  IdentityMap identity;
};

/// rho = A/255, identity = 65536 R + 256 G + B. Throws invalid_input on a
/// zero-sized or inconsistent image.
DecodedMaps decode(const RasterImage& image);

/// Inverse of decode with alpha quantized to the nearest of 256 levels.
RasterImage encode(const DensityMap& density, const IdentityMap& identity);

/// Clamp to t and renormalize by t, so rho' = min(rho, t) / t.
DensityMap apply_threshold(const DensityMap& density, double t);

struct ResizedMaps {
  DensityMap density;
  IdentityMap identity;
  /// Output pixels per input pixel along each axis.
  double scale_x = 1.0;
  double scale_y = 1.0;
};

/// Nearest-neighbour upscale so that the output holds at least
/// area_per_cell * n_cells pixels. A single uniform factor is applied to
/// both axes and the output dimensions are rounded up.
ResizedMaps resize_for_population(const DensityMap& density, const IdentityMap& identity,
                                  std::size_t n_cells, double area_per_cell = 500.0);

/// Zero every pixel whose center lies in a closed disc. Throws
/// degenerate_density when nothing is left.
DensityMap carve_holes(const DensityMap& density, std::span<const Eigen::Vector2d> centers,
                       std::span<const double> radii);

// Synthetic density generators used by the case-study pipelines.

/// rho grows linearly with x from lo at the left edge to hi at the right.
DensityMap linear_gradient(int width, int height, double lo = 0.0, double hi = 1.0);

/// Quadratic radial falloff from hi at the center to lo at the inscribed radius.
DensityMap radial_gradient(int width, int height, double lo = 0.0, double hi = 1.0);

/// Gaussian ring of relative radius and width on top of a floor value.
DensityMap annulus(int width, int height, double radius, double sigma, double floor = 0.2);

}  // namespace cellscape
