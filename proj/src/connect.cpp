#include "cellscape/connect.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>

#include "cellscape/error.hpp"
#include "cellscape/parallel.hpp"

namespace cellscape {

std::vector<std::vector<Eigen::Index>> ConnectivityGraph::adjacency() const {
  std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(n));
  for (const Edge& e : edges) adj[e.source].push_back(e.target);
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::vector<Eigen::Index> ConnectivityGraph::out_degrees() const {
  std::vector<Eigen::Index> deg(static_cast<std::size_t>(n), 0);
  for (const Edge& e : edges) ++deg[e.source];
  return deg;
}

ConnectivityGraph knn_graph(const Eigen::Matrix2Xd& points, Eigen::Index k) {
  const Eigen::Index n = points.cols();
  if (k < 1 || k > n - 1)
    throw Error(ErrorCode::invalid_parameter,
                "k must lie in [1, n-1]; got k=" + std::to_string(k) + " for n=" + std::to_string(n));
  ConnectivityGraph g{n, std::vector<Edge>(static_cast<std::size_t>(n * k))};
  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<double, Eigen::Index>> cand(static_cast<std::size_t>(n - 1));
    for (std::size_t i = begin; i < end; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      std::size_t c = 0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != ii) cand[c++] = {(points.col(j) - points.col(ii)).squaredNorm(), j};
      std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
      std::sort(cand.begin(), cand.begin() + k,
                [](const auto& a, const auto& b) { return a.second < b.second; });
      for (Eigen::Index m = 0; m < k; ++m) {
        const Eigen::Index j = cand[m].second;
        g.edges[i * k + m] = {ii, j, (points.col(j) - points.col(ii)).norm()};
      }
    }
  });
  return g;
}

ConnectivityGraph symmetrize(const ConnectivityGraph& graph) {
  ConnectivityGraph out{graph.n, graph.edges};
  for (const Edge& e : graph.edges) out.edges.push_back({e.target, e.source, e.length});
  std::sort(out.edges.begin(), out.edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end(),
                              [](const Edge& a, const Edge& b) { return a.source == b.source && a.target == b.target; }),
                  out.edges.end());
  return out;
}

ConnectivityGraph induced_subgraph(const ConnectivityGraph& graph, const std::vector<bool>& keep) {
  if (static_cast<Eigen::Index>(keep.size()) != graph.n)
    throw Error(ErrorCode::invalid_parameter, "subgraph mask length differs from node count");
  ConnectivityGraph out{graph.n, {}};
  for (const Edge& e : graph.edges)
    if (keep[e.source] && keep[e.target]) out.edges.push_back(e);
  return out;
}

HopPath shortest_hop_path(const ConnectivityGraph& graph, std::span<const Eigen::Index> sources,
                          std::span<const Eigen::Index> targets) {
  if (sources.empty() || targets.empty()) throw Error(ErrorCode::invalid_parameter, "source and target sets must be non-empty");
  const Eigen::Index n = graph.n;
  auto check = [&](Eigen::Index v) {
    if (v < 0 || v >= n) throw Error(ErrorCode::invalid_parameter, "cell index " + std::to_string(v) + " out of range");
  };
  for (Eigen::Index v : sources) check(v);
  for (Eigen::Index v : targets) check(v);

  // Hop distance from every node to the nearest target, over reversed edges.
  std::vector<std::vector<Eigen::Index>> reverse(static_cast<std::size_t>(n));
  for (const Edge& e : graph.edges) reverse[e.target].push_back(e.source);
  constexpr Eigen::Index unseen = std::numeric_limits<Eigen::Index>::max();
  std::vector<Eigen::Index> dist(static_cast<std::size_t>(n), unseen);
  std::deque<Eigen::Index> queue;
  for (Eigen::Index t : targets)
    if (dist[t] == unseen) {
      dist[t] = 0;
      queue.push_back(t);
    }
  while (!queue.empty()) {
    const Eigen::Index v = queue.front();
    queue.pop_front();
    for (Eigen::Index u : reverse[v])
      if (dist[u] == unseen) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
  }

  Eigen::Index start = -1;
  for (Eigen::Index s : sources)
    if (dist[s] != unseen && (start < 0 || dist[s] < dist[start] || (dist[s] == dist[start] && s < start))) start = s;
  if (start < 0) throw Error(ErrorCode::unreachable, "no directed path from the source set to the target set");

  HopPath out{dist[start], {start}};
  const auto adj = graph.adjacency();
  Eigen::Index v = start;
  while (dist[v] > 0) {
    for (Eigen::Index w : adj[v])
      if (dist[w] == dist[v] - 1) {
        v = w;
        break;
      }
    out.path.push_back(v);
  }
  return out;
}

EdgeBands edge_bands(const Eigen::Matrix2Xd& points, const std::vector<bool>& subset, double fraction) {
  if (!(fraction > 0.0 && fraction < 0.5)) throw Error(ErrorCode::invalid_parameter, "band fraction must lie in (0, 0.5)");
  const double lo = points.row(1).minCoeff(), hi = points.row(1).maxCoeff();
  const double band = fraction * (hi - lo);
  EdgeBands out;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    if (!subset.empty() && !subset[i]) continue;
    if (points(1, i) <= lo + band) out.top.push_back(i);
    if (points(1, i) >= hi - band) out.bottom.push_back(i);
  }
  return out;
}

PropagationReport measure_propagation(const Eigen::Matrix2Xd& points, const ConnectivityGraph& graph,
                                      double band_fraction) {
  if (points.cols() != graph.n) throw Error(ErrorCode::invalid_parameter, "graph and point set differ in size");
  if (points.cols() < 2) throw Error(ErrorCode::invalid_parameter, "propagation needs at least two cells");
  PropagationReport report;
  const double x0 = points.row(0).minCoeff(), width = points.row(0).maxCoeff() - x0;
  std::vector<int> third(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.cols(); ++i)
    third[i] = width > 0 ? std::min(2, static_cast<int>(3.0 * (points(0, i) - x0) / width)) : 0;

  for (int t = 0; t < 3; ++t) {
    ThirdReport& r = report.third[t];
    std::vector<bool> keep(third.size());
    for (std::size_t i = 0; i < third.size(); ++i) keep[i] = third[i] == t;
    r.cells = std::count(keep.begin(), keep.end(), true);
    const ConnectivityGraph sub = induced_subgraph(graph, keep);
    double total = 0.0;
    for (const Edge& e : sub.edges) total += e.length;
    r.mean_edge_length = sub.edges.empty() ? 0.0 : total / double(sub.edges.size());
    const EdgeBands bands = edge_bands(points, keep, band_fraction);
    if (bands.top.empty() || bands.bottom.empty()) continue;
    try {
      r.path = shortest_hop_path(sub, bands.top, bands.bottom);
      r.hops = r.path.hops;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::unreachable) throw;
    }
  }
  report.sparse = report.dense = 0;
  for (int t = 1; t < 3; ++t) {
    if (report.third[t].cells < report.third[report.sparse].cells) report.sparse = t;
    if (report.third[t].cells > report.third[report.dense].cells) report.dense = t;
  }
  return report;
}

}  // namespace cellscape
