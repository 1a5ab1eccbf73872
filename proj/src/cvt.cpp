#include "cellscape/cvt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "cellscape/error.hpp"
#include "cellscape/parallel.hpp"
#include "cellscape/random.hpp"

namespace cellscape {

namespace {

constexpr int kRowsPerChunk = 32;
constexpr std::uint64_t kInitialStream = 0x1a11;
constexpr std::uint64_t kReseedStream = 0x5eed;

struct Support {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive bounding box of rho > 0
  double peak = 0.0;
};

Support find_support(const DensityMap& d) {
  Support s{d.width(), d.height(), -1, -1, 0.0};
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      const double r = d.rho(y, x);
      if (r > 0.0) {
        s.x0 = std::min(s.x0, x);
        s.x1 = std::max(s.x1, x);
        s.y0 = std::min(s.y0, y);
        s.y1 = std::max(s.y1, y);
        s.peak = std::max(s.peak, r);
      }
    }
  }
  if (s.x1 < 0) throw Error(ErrorCode::degenerate_density, "density has zero total mass");
  return s;
}

Eigen::Vector2d draw_from_density(const DensityMap& d, const Support& s, Rng& rng) {
  const auto bw = static_cast<std::uint64_t>(s.x1 - s.x0 + 1);
  const auto bh = static_cast<std::uint64_t>(s.y1 - s.y0 + 1);
  for (;;) {
    const int x = s.x0 + static_cast<int>(rng.below(bw));
    const int y = s.y0 + static_cast<int>(rng.below(bh));
    const double r = d.rho(y, x);
    if (r > 0.0 && rng.uniform() * s.peak < r) {
      const double jx = rng.uniform();
      const double jy = rng.uniform();
      return {x + jx, y + jy};
    }
  }
}

}  // namespace

SiteSet initial_sample(const DensityMap& density, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::invalid_parameter, "site count must be at least 1");
  const Support support = find_support(density);
  Rng rng(derive_seed({seed, kInitialStream}));
  Eigen::Matrix2Xd positions(2, n);
  for (Eigen::Index i = 0; i < n; ++i) positions.col(i) = draw_from_density(density, support, rng);
  return SiteSet(std::move(positions));
}

LabelMap rasterize_voronoi(const SiteSet& sites, int width, int height) {
  const Eigen::Index n = sites.size();
  if (n < 1) throw Error(ErrorCode::invalid_parameter, "cannot label a Voronoi diagram without sites");
  if (width < 1 || height < 1) throw Error(ErrorCode::invalid_parameter, "label map needs positive dimensions");

  // Uniform bucket grid with roughly one site per bucket; buckets double as
  // pixel blocks that share one candidate list.
  const int g = std::max(4, static_cast<int>(std::lround(std::sqrt(double(width) * height / double(n)))));
  const int gx = (width + g - 1) / g;
  const int gy = (height + g - 1) / g;
  auto bucket_of = [&](double v, int cells) {
    if (!(v >= 0.0)) return 0;
    return std::min(cells - 1, static_cast<int>(v / g));
  };

  std::vector<int> offsets(std::size_t(gx) * gy + 1, 0);
  std::vector<int> cell_of(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = bucket_of(sites.positions(1, i), gy) * gx + bucket_of(sites.positions(0, i), gx);
    cell_of[i] = c;
    ++offsets[c + 1];
  }
  for (std::size_t c = 0; c + 1 < offsets.size(); ++c) offsets[c + 1] += offsets[c];
  std::vector<int> members(n);
  {
    std::vector<int> fill(offsets.begin(), offsets.end() - 1);
    for (Eigen::Index i = 0; i < n; ++i) members[fill[cell_of[i]]++] = static_cast<int>(i);
  }

  LabelMap out{RowMajorArray<std::int32_t>(height, width)};
  const auto& P = sites.positions;

  parallel_for(0, std::size_t(gy), [&](std::size_t by_begin, std::size_t by_end) {
    struct Candidate {
      int index;
      double min_d2;
    };
    std::vector<Candidate> found;
    std::vector<int> candidates;
    for (int by = int(by_begin); by < int(by_end); ++by) {
      const int ya = by * g, yb = std::min(height, (by + 1) * g);
      for (int bx = 0; bx < gx; ++bx) {
        const int xa = bx * g, xb = std::min(width, (bx + 1) * g);
        const double cx0 = xa + 0.5, cx1 = xb - 0.5, cy0 = ya + 0.5, cy1 = yb - 0.5;

        found.clear();
        double bound = std::numeric_limits<double>::infinity();
        for (int r = 0;; ++r) {
          if (r > 0) {
            const double lower = double(r - 1) * g;
            if (lower * lower > bound) break;
            if (bx - r < 0 && by - r < 0 && bx + r >= gx && by + r >= gy) break;
          }
          for (int cy = by - r; cy <= by + r; ++cy) {
            if (cy < 0 || cy >= gy) continue;
            const bool edge_row = (cy == by - r || cy == by + r);
            for (int cx = bx - r; cx <= bx + r; cx += (edge_row || r == 0) ? 1 : 2 * r) {
              if (cx < 0 || cx >= gx) continue;
              const int c = cy * gx + cx;
              for (int k = offsets[c]; k < offsets[c + 1]; ++k) {
                const int s = members[k];
                const double sx = P(0, s), sy = P(1, s);
                const double fx = std::max(std::abs(cx0 - sx), std::abs(cx1 - sx));
                const double fy = std::max(std::abs(cy0 - sy), std::abs(cy1 - sy));
                bound = std::min(bound, fx * fx + fy * fy);
                const double nx = std::clamp(sx, cx0, cx1) - sx;
                const double ny = std::clamp(sy, cy0, cy1) - sy;
                found.push_back({s, nx * nx + ny * ny});
              }
            }
          }
        }

        candidates.clear();
        for (const Candidate& c : found)
          if (c.min_d2 <= bound) candidates.push_back(c.index);
        std::sort(candidates.begin(), candidates.end());

        for (int y = ya; y < yb; ++y) {
          const double py = y + 0.5;
          for (int x = xa; x < xb; ++x) {
            const double px = x + 0.5;
            double best = std::numeric_limits<double>::infinity();
            int label = candidates.front();
            for (int s : candidates) {
              const double dx = px - P(0, s), dy = py - P(1, s);
              const double d = dx * dx + dy * dy;
              if (d < best) {
                best = d;
                label = s;
              }
            }
            out.label(y, x) = label;
          }
        }
      }
    }
  });
  return out;
}

DensityIntegrals::DensityIntegrals(const DensityMap& density)
    : density_(&density),
      mass_(RowMajorArray<double>::Zero(density.height(), density.width() + 1)),
      moment_(RowMajorArray<double>::Zero(density.height(), density.width() + 1)) {
  for (int y = 0; y < density.height(); ++y) {
    double m = 0.0, q = 0.0;
    for (int x = 0; x < density.width(); ++x) {
      const double r = density.rho(y, x);
      m += r;
      q += (x + 0.5) * r;
      mass_(y, x + 1) = m;
      moment_(y, x + 1) = q;
    }
  }
}

CentroidResult weighted_centroids(const LabelMap& labels, const DensityIntegrals& integrals, const SiteSet& sites,
                                  std::uint64_t seed, int iteration) {
  const DensityMap& density = integrals.density();
  const int w = labels.width(), h = labels.height();
  if (w != density.width() || h != density.height())
    throw Error(ErrorCode::invalid_input, "label map and density differ in size");
  const Eigen::Index n = sites.size();
  if (labels.label.size() > 0 && (labels.label.minCoeff() < 0 || labels.label.maxCoeff() >= n))
    throw Error(ErrorCode::invalid_input, "label outside the site range");

  // Fixed row chunks, summed in chunk order, keep the result independent of
  // the worker count.
  const int chunks = (h + kRowsPerChunk - 1) / kRowsPerChunk;
  Eigen::MatrixXd partial = Eigen::MatrixXd::Zero(3 * n, chunks);
  parallel_for(0, std::size_t(chunks), [&](std::size_t c0, std::size_t c1) {
    for (std::size_t c = c0; c < c1; ++c) {
      auto acc = partial.col(Eigen::Index(c));
      const int y_end = std::min(h, int(c + 1) * kRowsPerChunk);
      for (int y = int(c) * kRowsPerChunk; y < y_end; ++y) {
        int x0 = 0;
        while (x0 < w) {
          const std::int32_t lab = labels.label(y, x0);
          int x1 = x0 + 1;
          while (x1 < w && labels.label(y, x1) == lab) ++x1;
          const double m = integrals.mass(y, x0, x1);
          acc(3 * lab) += m;
          acc(3 * lab + 1) += integrals.moment(y, x0, x1);
          acc(3 * lab + 2) += (y + 0.5) * m;
          x0 = x1;
        }
      }
    }
  });
  Eigen::VectorXd totals = Eigen::VectorXd::Zero(3 * n);
  for (int c = 0; c < chunks; ++c) totals += partial.col(c);

  CentroidResult result{SiteSet(Eigen::Matrix2Xd(2, n)), {}};
  std::optional<Support> support;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = totals(3 * i);
    if (m > 0.0) {
      result.sites.positions(0, i) = totals(3 * i + 1) / m;
      result.sites.positions(1, i) = totals(3 * i + 2) / m;
    } else {
      if (!support) support = find_support(density);
      Rng rng(derive_seed({seed, kReseedStream, std::uint64_t(iteration), std::uint64_t(i)}));
      result.sites.positions.col(i) = draw_from_density(density, *support, rng);
      result.reseeded.push_back(i);
    }
  }
  return result;
}

CentroidResult weighted_centroids(const LabelMap& labels, const DensityMap& density, const SiteSet& sites,
                                  std::uint64_t seed, int iteration) {
  return weighted_centroids(labels, DensityIntegrals(density), sites, seed, iteration);
}

double quantization_energy(const LabelMap& labels, const DensityMap& density, const SiteSet& sites) {
  const int w = labels.width(), h = labels.height();
  if (w != density.width() || h != density.height())
    throw Error(ErrorCode::invalid_input, "label map and density differ in size");
  long double total = 0.0L;
  for (int y = 0; y < h; ++y) {
    long double row = 0.0L;
    for (int x = 0; x < w; ++x) {
      const double r = density.rho(y, x);
      if (r == 0.0) continue;
      const auto s = sites[labels.label(y, x)];
      const double dx = x + 0.5 - s.x(), dy = y + 0.5 - s.y();
      row += static_cast<long double>(r) * (dx * dx + dy * dy);
    }
    total += row;
  }
  return static_cast<double>(total);
}

std::vector<std::int64_t> cell_areas(const LabelMap& labels, Eigen::Index n) {
  std::vector<std::int64_t> areas(n, 0);
  for (Eigen::Index k = 0; k < labels.label.size(); ++k) {
    const auto lab = labels.label.data()[k];
    if (lab >= 0 && lab < n) ++areas[lab];
  }
  return areas;
}

SiteSet stipple(const DensityMap& density, Eigen::Index n, const StippleOptions& options) {
  if (options.iterations < 0) throw Error(ErrorCode::invalid_parameter, "iteration count must be non-negative");
  SiteSet sites = initial_sample(density, n, options.seed);
  if (options.iterations == 0) return sites;
  const DensityIntegrals integrals(density);
  for (int it = 0; it < options.iterations; ++it) {
    const LabelMap labels = rasterize_voronoi(sites, density.width(), density.height());
    CentroidResult moved = weighted_centroids(labels, integrals, sites, options.seed, it);
    if (options.observer) options.observer(IterationTrace{it, sites, labels, moved});
    sites = std::move(moved.sites);
  }
  return sites;
}

}  // namespace cellscape
