#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Core>

#include "cellscape/density.hpp"
#include "cellscape/geometry.hpp"

namespace cellscape {

struct Cell {
  Eigen::Index index = 0;
  Identity structure = 0;
  Point position = Point::Zero();
  /// Signed distances to the major (u) and minor (v) axis.
  Point frame = Point::Zero();
  bool input = false;
  bool output = false;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Placed cells over a width x height domain.
struct Population {
  double width = 0.0;
  double height = 0.0;
  std::vector<Cell> cells;

  Eigen::Index size() const { return static_cast<Eigen::Index>(cells.size()); }
  Eigen::Matrix2Xd positions() const {
    Eigen::Matrix2Xd p(2, size());
    for (Eigen::Index i = 0; i < size(); ++i) p.col(i) = cells[i].position;
    return p;
  }
  friend bool operator==(const Population&, const Population&) = default;
};

/// Wraps raster sites as cells, tagging each with the identity of its pixel.
inline Population population_from_sites(const Eigen::Matrix2Xd& sites, const IdentityMap* identity, double width,
                                        double height) {
  Population pop{width, height, {}};
  pop.cells.reserve(sites.cols());
  for (Eigen::Index i = 0; i < sites.cols(); ++i) {
    Cell c;
    c.index = i;
    c.position = sites.col(i);
    if (identity && identity->width() > 0) {
      const int x = std::clamp(static_cast<int>(c.position.x()), 0, identity->width() - 1);
      const int y = std::clamp(static_cast<int>(c.position.y()), 0, identity->height() - 1);
      c.structure = identity->id(y, x);
    }
    pop.cells.push_back(c);
  }
  return pop;
}

}  // namespace cellscape
