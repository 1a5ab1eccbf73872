#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "cellscape/density.hpp"

namespace cellscape {

/// Continuous site positions in pixel units; column i is site i.
struct SiteSet {
  Eigen::Matrix2Xd positions;

  SiteSet() = default;
  explicit SiteSet(Eigen::Matrix2Xd p) : positions(std::move(p)) {}

  Eigen::Index size() const { return positions.cols(); }
  auto operator[](Eigen::Index i) const { return positions.col(i); }
  friend bool operator==(const SiteSet& a, const SiteSet& b) {
    return a.positions.cols() == b.positions.cols() && a.positions == b.positions;
  }
};

/// Per-pixel index of the nearest site to the pixel center.
struct LabelMap {
  RowMajorArray<std::int32_t> label;

  int width() const { return static_cast<int>(label.cols()); }
  int height() const { return static_cast<int>(label.rows()); }
};

/// Density-proportional rejection sampling, jittered inside the accepted pixel.
SiteSet initial_sample(const DensityMap& density, Eigen::Index n, std::uint64_t seed);

/// Exact nearest-site labeling of pixel centers (x + 0.5, y + 0.5) under the
/// Euclidean metric; equidistant pixels go to the lowest site index.
LabelMap rasterize_voronoi(const SiteSet& sites, int width, int height);

/// Row prefix sums of rho and x*rho. Built once per density map; lets a run
/// of same-label pixels be integrated with two lookups.
class DensityIntegrals {
 public:
  explicit DensityIntegrals(const DensityMap& density);

  const DensityMap& density() const { return *density_; }
  /// Sum of rho over pixels [x0, x1) of row y.
  double mass(int y, int x0, int x1) const { return mass_(y, x1) - mass_(y, x0); }
  /// Sum of (x + 0.5) * rho over pixels [x0, x1) of row y.
  double moment(int y, int x0, int x1) const { return moment_(y, x1) - moment_(y, x0); }

 private:
  const DensityMap* density_;
  RowMajorArray<double> mass_;
  RowMajorArray<double> moment_;
};

struct CentroidResult {
  SiteSet sites;
  /// Sites whose cell had no mass and were redrawn from the density.
  std::vector<Eigen::Index> reseeded;
};

/// Density-weighted centroids of every labeled cell. seed and iteration
/// select the deterministic stream used to re-seed zero-mass cells.
CentroidResult weighted_centroids(const LabelMap& labels, const DensityIntegrals& integrals, const SiteSet& sites,
                                  std::uint64_t seed = 0, int iteration = 0);
CentroidResult weighted_centroids(const LabelMap& labels, const DensityMap& density, const SiteSet& sites,
                                  std::uint64_t seed = 0, int iteration = 0);

/// Sum over pixels of rho * |pixel center - assigned site|^2.
double quantization_energy(const LabelMap& labels, const DensityMap& density, const SiteSet& sites);

/// Pixel count of every Voronoi cell.
std::vector<std::int64_t> cell_areas(const LabelMap& labels, Eigen::Index n);

struct IterationTrace {
  int iteration;             // 0-based round index
  const SiteSet& sites;      // sites at the start of the round
  const LabelMap& labels;    // their Voronoi labeling
  const CentroidResult& moved;
};

struct StippleOptions {
  int iterations = 50;
  std::uint64_t seed = 0;
  std::function<void(const IterationTrace&)> observer;
};

/// Weighted Voronoi stippling: initial_sample then a fixed number of Lloyd
/// rounds (label, move every site to its weighted centroid).
SiteSet stipple(const DensityMap& density, Eigen::Index n, const StippleOptions& options = {});

}  // namespace cellscape
