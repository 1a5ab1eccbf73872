#include "cellscape/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "cellscape/cvt.hpp"
#include "cellscape/error.hpp"
#include "cellscape/field.hpp"
#include "cellscape/parallel.hpp"
#include "cellscape/random.hpp"

namespace cellscape {

namespace {

std::uint8_t quantize(double c) { return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); }

Rgba to_rgba(const Eigen::Vector3d& c) { return {quantize(c[0]), quantize(c[1]), quantize(c[2]), 255}; }

Eigen::Vector3d to_unit(const Rgba& c) { return Eigen::Vector3d(c.r, c.g, c.b) / 255.0; }

Colormap::Stop hex_stop(double t, std::uint32_t hex) {
  return {t, Eigen::Vector3d((hex >> 16) & 0xff, (hex >> 8) & 0xff, hex & 0xff) / 255.0};
}

Eigen::Vector3d hsv(double h, double s, double v) {
  const double k = 6.0 * (h - std::floor(h));
  auto channel = [&](double n) {
    const double m = std::fmod(n + k, 6.0);
    return v - v * s * std::clamp(std::min(m, 4.0 - m), 0.0, 1.0);
  };
  return {channel(5.0), channel(3.0), channel(1.0)};
}

void check_values(const Population& pop, const Eigen::VectorXd& values, const char* who) {
  if (values.size() != pop.size())
    throw Error(ErrorCode::invalid_input, std::string(who) + ": " + std::to_string(values.size()) + " values for " +
                                              std::to_string(pop.size()) + " cells");
}

// Catmull-Rom weights for offsets -1..2 at fractional position t.
std::array<double, 4> catmull_rom(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t), 0.5 * (t3 - t2)};
}

// Resamples along the rows (first index) of a column-major matrix.
Eigen::MatrixXd upsample_rows(const Eigen::MatrixXd& g, int factor) {
  const Eigen::Index rows = g.rows(), out_rows = (rows - 1) * factor + 1;
  Eigen::MatrixXd out(out_rows, g.cols());
  for (Eigen::Index i = 0; i < out_rows; ++i) {
    const Eigen::Index base = i / factor;
    const double t = static_cast<double>(i % factor) / factor;
    if (t == 0.0) {
      out.row(i) = g.row(base);
      continue;
    }
    const auto w = catmull_rom(t);
    out.row(i).setZero();
    for (int k = 0; k < 4; ++k) out.row(i) += w[k] * g.row(std::clamp<Eigen::Index>(base - 1 + k, 0, rows - 1));
  }
  return out;
}

}  // namespace

void Colormap::validate() const {
  if (stops.size() < 2) throw Error(ErrorCode::invalid_input, "colormap " + name + ": needs at least two stops");
  if (stops.front().t != 0.0 || stops.back().t != 1.0)
    throw Error(ErrorCode::invalid_input, "colormap " + name + ": stops must span [0, 1]");
  for (std::size_t i = 1; i < stops.size(); ++i)
    if (!(stops[i].t > stops[i - 1].t))
      throw Error(ErrorCode::invalid_input, "colormap " + name + ": stop positions must increase");
}

Rgba Colormap::operator()(double t) const {
  t = std::isnan(t) ? 0.0 : std::clamp(t, 0.0, 1.0);
  auto hi = std::upper_bound(stops.begin(), stops.end(), t, [](double v, const Stop& s) { return v < s.t; });
  if (hi == stops.end()) return to_rgba(stops.back().rgb);
  if (hi == stops.begin()) return to_rgba(stops.front().rgb);
  const Stop& lo = *(hi - 1);
  const double f = (t - lo.t) / (hi->t - lo.t);
  return to_rgba((1.0 - f) * lo.rgb + f * hi->rgb);
}

Colormap Colormap::viridis() {
  return {"viridis",
          {hex_stop(0.0, 0x440154), hex_stop(0.25, 0x3b528b), hex_stop(0.5, 0x21918c), hex_stop(0.75, 0x5ec962),
           hex_stop(1.0, 0xfde725)}};
}

Colormap Colormap::grayscale() { return {"grayscale", {hex_stop(0.0, 0x000000), hex_stop(1.0, 0xffffff)}}; }

std::vector<Rgba> map_colors(const Eigen::VectorXd& values, const Colormap& colormap) {
  std::vector<Rgba> out(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) out[i] = colormap(values[i]);
  return out;
}

std::vector<Rgba> random_colors(Eigen::Index n, std::uint64_t seed) {
  std::vector<Rgba> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(i)}));
    const double h = rng.uniform();
    const double s = rng.uniform(0.45, 0.85);
    const double v = rng.uniform(0.7, 0.95);
    out[i] = to_rgba(hsv(h, s, v));
  }
  return out;
}

Eigen::VectorXd normalize(const Eigen::VectorXd& values) {
  if (values.size() == 0) return values;
  const double lo = values.minCoeff(), hi = values.maxCoeff();
  if (!(hi > lo)) return Eigen::VectorXd::Constant(values.size(), 0.5);
  return (values.array() - lo) / (hi - lo);
}

std::pair<int, int> render_size(const Population& pop, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::invalid_parameter, "render: scale must be positive");
  return {std::max(1, static_cast<int>(std::ceil(pop.width * scale))),
          std::max(1, static_cast<int>(std::ceil(pop.height * scale)))};
}

RasterImage render_discs(const Population& pop, const std::vector<Rgba>& colors, const Eigen::VectorXd& values,
                         const DiscOptions& options) {
  check_values(pop, values, "render_discs");
  if (colors.size() != static_cast<std::size_t>(pop.size()))
    throw Error(ErrorCode::invalid_input, "render_discs: color count differs from cell count");
  const auto [width, height] = render_size(pop, options.scale);
  const double s = options.scale;
  const double base_radius =
      options.radius > 0.0 ? options.radius
                           : 0.4 * std::sqrt(pop.width * pop.height / std::max<double>(1.0, double(pop.size())));
  if (!(base_radius > 0.0)) throw Error(ErrorCode::invalid_parameter, "render_discs: radius must be positive");

  constexpr int sub = 4;
  RowMajorArray<double> r(height, width), g(height, width), b(height, width);
  const Eigen::Vector3d bg = to_unit(options.background);
  r.setConstant(bg[0]);
  g.setConstant(bg[1]);
  b.setConstant(bg[2]);

  for (Eigen::Index i = 0; i < pop.size(); ++i) {
    const double v = std::isnan(values[i]) ? 0.0 : std::clamp(values[i], 0.0, 1.0);
    const double radius = (options.mode == DiscMode::radius ? base_radius * v : base_radius) * s;
    if (radius <= 0.0) continue;
    const Point c = pop.cells[i].position * s;
    const Eigen::Vector3d color = to_unit(colors[i]);
    const int x0 = std::max(0, static_cast<int>(std::floor(c.x() - radius)));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(c.x() + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(c.y() - radius)));
    const int y1 = std::min(height - 1, static_cast<int>(std::floor(c.y() + radius)));
    const double r2 = radius * radius;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        int inside = 0;
        for (int sy = 0; sy < sub; ++sy)
          for (int sx = 0; sx < sub; ++sx) {
            const double dx = x + (sx + 0.5) / sub - c.x(), dy = y + (sy + 0.5) / sub - c.y();
            inside += dx * dx + dy * dy <= r2;
          }
        if (!inside) continue;
        const double a = static_cast<double>(inside) / (sub * sub);
        r(y, x) += a * (color[0] - r(y, x));
        g(y, x) += a * (color[1] - g(y, x));
        b(y, x) += a * (color[2] - b(y, x));
      }
    }
  }

  RasterImage img(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) img.at(x, y) = {quantize(r(y, x)), quantize(g(y, x)), quantize(b(y, x)), 255};
  return img;
}

RasterImage render_discs(const Population& pop, const Eigen::VectorXd& values, const Colormap& colormap,
                         const DiscOptions& options) {
  check_values(pop, values, "render_discs");
  std::vector<Rgba> colors = options.mode == DiscMode::radius
                                 ? std::vector<Rgba>(pop.size(), colormap(1.0))
                                 : map_colors(values, colormap);
  return render_discs(pop, colors, values, options);
}

RasterImage render_voronoi(const Population& pop, const std::vector<Rgba>& colors, const VoronoiOptions& options) {
  if (pop.size() == 0) throw Error(ErrorCode::invalid_input, "render_voronoi: population is empty");
  if (colors.size() != static_cast<std::size_t>(pop.size()))
    throw Error(ErrorCode::invalid_input, "render_voronoi: color count differs from cell count");
  const auto [width, height] = render_size(pop, options.scale);
  const LabelMap labels = rasterize_voronoi(SiteSet(pop.positions() * options.scale), width, height);
  RasterImage img(width, height);
  parallel_for(0, static_cast<std::size_t>(height), [&](std::size_t b, std::size_t e) {
    for (std::size_t yy = b; yy < e; ++yy) {
      const int y = static_cast<int>(yy);
      for (int x = 0; x < width; ++x) {
        const auto l = labels.label(y, x);
        const bool edge = options.borders && ((x + 1 < width && labels.label(y, x + 1) != l) ||
                                              (y + 1 < height && labels.label(y + 1, x) != l));
        img.at(x, y) = edge ? options.border : colors[l];
      }
    }
  });
  return img;
}

RasterImage render_voronoi(const Population& pop, const Eigen::VectorXd& values, const Colormap& colormap,
                           const VoronoiOptions& options) {
  check_values(pop, values, "render_voronoi");
  return render_voronoi(pop, map_colors(values, colormap), options);
}

Eigen::MatrixXd upsample_bicubic(const Eigen::MatrixXd& grid, int factor) {
  if (factor < 1) throw Error(ErrorCode::invalid_parameter, "upsample: factor must be at least 1");
  if (grid.size() == 0) throw Error(ErrorCode::invalid_input, "upsample: grid is empty");
  if (factor == 1) return grid;
  const Eigen::MatrixXd tall = upsample_rows(grid, factor);
  return upsample_rows(tall.transpose(), factor).transpose();
}

RasterImage render_grid(const Eigen::MatrixXd& grid, const Colormap& colormap, int factor) {
  const Eigen::MatrixXd up = upsample_bicubic(grid, factor);
  RasterImage img(static_cast<int>(up.cols()), static_cast<int>(up.rows()));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) img.at(x, y) = colormap(up(y, x));
  return img;
}

RenderStyle parse_render_style(const std::string& name) {
  if (name == "discs") return RenderStyle::discs;
  if (name == "voronoi") return RenderStyle::voronoi;
  if (name == "histogram") return RenderStyle::histogram;
  throw Error(ErrorCode::invalid_parameter, "render: style must be discs, voronoi or histogram, not " + name);
}

RasterImage render_population(const Population& pop, const Eigen::VectorXd* values, const RenderRequest& request) {
  Eigen::VectorXd v = values ? *values : Eigen::VectorXd::Ones(pop.size());
  check_values(pop, v, "render");
  if (request.style == RenderStyle::histogram) {
    if (!request.colormap) throw Error(ErrorCode::invalid_parameter, "render: histogram style needs a colormap");
    const auto hist = activity_histogram(pop, v, request.bins, request.bins);
    Eigen::MatrixXd grid = hist.means;
    if (request.normalize) grid = normalize(grid.reshaped()).reshaped(grid.rows(), grid.cols());
    return render_grid(grid, *request.colormap, request.upsample);
  }
  if (request.normalize && values) v = normalize(v);
  const std::vector<Rgba> colors = request.colormap ? (request.style == RenderStyle::discs && request.mode == DiscMode::radius
                                                           ? std::vector<Rgba>(pop.size(), (*request.colormap)(1.0))
                                                           : map_colors(v, *request.colormap))
                                                    : random_colors(pop.size(), request.seed);
  if (request.style == RenderStyle::voronoi) {
    VoronoiOptions opt;
    opt.scale = request.scale;
    opt.borders = request.borders;
    return render_voronoi(pop, colors, opt);
  }
  DiscOptions opt;
  opt.scale = request.scale;
  opt.mode = request.mode;
  opt.radius = request.radius;
  return render_discs(pop, colors, v, opt);
}

}  // namespace cellscape
