#include "cellscape/density.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cellscape/error.hpp"

namespace cellscape {

DecodedMaps decode(const RasterImage& image) {
  if (image.width < 1 || image.height < 1)
    throw Error(ErrorCode::invalid_input, "image has zero size");
  if (image.pixels.size() != std::size_t(image.width) * image.height)
    throw Error(ErrorCode::invalid_input, "pixel array does not match image dimensions");

  DecodedMaps out{DensityMap(image.width, image.height), IdentityMap(image.width, image.height)};
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const Rgba& p = image.at(x, y);
      out.density.rho(y, x) = p.a / 255.0;
      out.identity.id(y, x) = pack_identity(p.r, p.g, p.b);
    }
  }
  return out;
}

RasterImage encode(const DensityMap& density, const IdentityMap& identity) {
  if (density.width() != identity.width() || density.height() != identity.height())
    throw Error(ErrorCode::invalid_input, "density and identity maps differ in size");
  RasterImage image(density.width(), density.height());
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const Identity id = identity.id(y, x);
      const double a = std::clamp(density.rho(y, x), 0.0, 1.0);
      image.at(x, y) = Rgba{static_cast<std::uint8_t>((id >> 16) & 0xff), static_cast<std::uint8_t>((id >> 8) & 0xff),
                            static_cast<std::uint8_t>(id & 0xff), static_cast<std::uint8_t>(std::lround(a * 255.0))};
    }
  }
  return image;
}

DensityMap apply_threshold(const DensityMap& density, double t) {
  if (!(t > 0.0) || t > 1.0)
    throw Error(ErrorCode::invalid_parameter, "threshold must lie in (0, 1], got " + std::to_string(t));
  return DensityMap(density.rho.min(t) / t);
}

ResizedMaps resize_for_population(const DensityMap& density, const IdentityMap& identity,
                                  std::size_t n_cells, double area_per_cell) {
  if (n_cells < 1) throw Error(ErrorCode::invalid_parameter, "population size must be at least 1");
  if (!(area_per_cell > 0.0)) throw Error(ErrorCode::invalid_parameter, "area per cell must be positive");
  if (density.width() != identity.width() || density.height() != identity.height())
    throw Error(ErrorCode::invalid_input, "density and identity maps differ in size");
  if (!(density.mass() > 0.0)) throw Error(ErrorCode::degenerate_density, "density has zero total mass");

  const int w = density.width(), h = density.height();
  const double target = area_per_cell * static_cast<double>(n_cells);
  double s = std::max(1.0, std::sqrt(target / (double(w) * h)));
  long out_w = 0, out_h = 0;
  for (;;) {
    out_w = static_cast<long>(std::ceil(w * s));
    out_h = static_cast<long>(std::ceil(h * s));
    if (s == 1.0 || double(out_w) * double(out_h) >= target) break;
    s = std::nextafter(s, 2.0 * s);
  }

  ResizedMaps out{DensityMap(int(out_w), int(out_h)), IdentityMap(int(out_w), int(out_h)),
                  double(out_w) / w, double(out_h) / h};
  std::vector<int> src_x(out_w);
  for (long x = 0; x < out_w; ++x)
    src_x[x] = std::min(w - 1, static_cast<int>(std::floor((x + 0.5) * w / double(out_w))));
  for (long y = 0; y < out_h; ++y) {
    const int sy = std::min(h - 1, static_cast<int>(std::floor((y + 0.5) * h / double(out_h))));
    for (long x = 0; x < out_w; ++x) {
      out.density.rho(y, x) = density.rho(sy, src_x[x]);
      out.identity.id(y, x) = identity.id(sy, src_x[x]);
    }
  }
  return out;
}

DensityMap carve_holes(const DensityMap& density, std::span<const Eigen::Vector2d> centers,
                       std::span<const double> radii) {
  if (centers.size() != radii.size())
    throw Error(ErrorCode::invalid_parameter, "hole centers and radii differ in length");
  DensityMap out = density;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double r = radii[i];
    if (!(r >= 0.0)) throw Error(ErrorCode::invalid_parameter, "hole radius must be non-negative");
    const Eigen::Vector2d c = centers[i];
    const int y0 = std::max(0, static_cast<int>(std::floor(c.y() - r - 1)));
    const int y1 = std::min(out.height() - 1, static_cast<int>(std::ceil(c.y() + r + 1)));
    const int x0 = std::max(0, static_cast<int>(std::floor(c.x() - r - 1)));
    const int x1 = std::min(out.width() - 1, static_cast<int>(std::ceil(c.x() + r + 1)));
    for (int y = y0; y <= y1; ++y) {
      const double dy = y + 0.5 - c.y();
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - c.x();
        if (dx * dx + dy * dy <= r * r) out.rho(y, x) = 0.0;
      }
    }
  }
  if (!(out.mass() > 0.0)) throw Error(ErrorCode::degenerate_density, "carving removed all density");
  return out;
}

DensityMap linear_gradient(int width, int height, double lo, double hi) {
  DensityMap d(width, height);
  for (int x = 0; x < width; ++x) d.rho.col(x).setConstant(lo + (hi - lo) * (x + 0.5) / width);
  return d;
}

DensityMap radial_gradient(int width, int height, double lo, double hi) {
  DensityMap d(width, height);
  const double cx = width / 2.0, cy = height / 2.0, radius = std::min(width, height) / 2.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double r = std::hypot(x + 0.5 - cx, y + 0.5 - cy) / radius;
      const double t = std::max(0.0, 1.0 - r);
      d.rho(y, x) = lo + (hi - lo) * t * t;
    }
  }
  return d;
}

DensityMap annulus(int width, int height, double radius, double sigma, double floor) {
  DensityMap d(width, height);
  const double cx = width / 2.0, cy = height / 2.0, extent = std::min(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double r = std::hypot(x + 0.5 - cx, y + 0.5 - cy) / extent;
      const double z = (r - radius) / sigma;
      d.rho(y, x) = floor + (1.0 - floor) * std::exp(-0.5 * z * z);
    }
  }
  return d;
}

}  // namespace cellscape
