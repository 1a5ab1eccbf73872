#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "cellscape/population.hpp"

namespace cellscape {

struct Edge {
  Eigen::Index source = 0;
  Eigen::Index target = 0;
  double length = 0.0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct ConnectivityGraph {
  Eigen::Index n = 0;
  std::vector<Edge> edges;  // sorted by (source, target)

  /// Targets of each node's outgoing edges.
  std::vector<std::vector<Eigen::Index>> adjacency() const;
  std::vector<Eigen::Index> out_degrees() const;
  friend bool operator==(const ConnectivityGraph&, const ConnectivityGraph&) = default;
};

/// Pairwise Euclidean distances between the columns of a d x n matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> distance_matrix(
    const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.cols();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> d(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    d(j, j) = Scalar(0);
    for (Eigen::Index i = j + 1; i < n; ++i) d(i, j) = d(j, i) = (points.col(i) - points.col(j)).norm();
  }
  return d;
}

inline Eigen::MatrixXd distance_matrix(const Population& population) {
  return distance_matrix(population.positions());
}

/// Directed edge from every point to each of its k nearest others; equal
/// distances prefer the lower index. Requires 1 <= k <= n - 1.
ConnectivityGraph knn_graph(const Eigen::Matrix2Xd& points, Eigen::Index k);

/// Edge union with its reverse.
ConnectivityGraph symmetrize(const ConnectivityGraph& graph);

/// Keeps only edges whose endpoints are both marked; node indices unchanged.
ConnectivityGraph induced_subgraph(const ConnectivityGraph& graph, const std::vector<bool>& keep);

struct HopPath {
  Eigen::Index hops = 0;
  std::vector<Eigen::Index> path;
};

/// Minimum number of directed edges from any source to any target; the
/// returned path is the lexicographically smallest among the shortest.
HopPath shortest_hop_path(const ConnectivityGraph& graph, std::span<const Eigen::Index> sources,
                          std::span<const Eigen::Index> targets);

/// Cells of a subset whose y lies within fraction of the bounding-box
/// height from the top (smallest y) or bottom.
struct EdgeBands {
  std::vector<Eigen::Index> top;
  std::vector<Eigen::Index> bottom;
};
EdgeBands edge_bands(const Eigen::Matrix2Xd& points, const std::vector<bool>& subset, double fraction = 0.05);

/// Top-to-bottom propagation measured separately in the left, middle and
/// right vertical thirds of the bounding box.
struct ThirdReport {
  Eigen::Index cells = 0;
  Eigen::Index hops = -1;  // -1 when the bands are disconnected
  double mean_edge_length = 0.0;
  HopPath path;
};

struct PropagationReport {
  ThirdReport third[3];
  int sparse = 0;  // third with the fewest cells
  int dense = 2;   // third with the most cells
};

PropagationReport measure_propagation(const Eigen::Matrix2Xd& points, const ConnectivityGraph& graph,
                                      double band_fraction = 0.05);

}  // namespace cellscape
