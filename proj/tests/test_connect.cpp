#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "cellscape/connect.hpp"
#include "cellscape/cvt.hpp"
#include "cellscape/random.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cellscape;
using support::catch_error;

namespace {

std::set<std::pair<Eigen::Index, Eigen::Index>> edge_set(const ConnectivityGraph& g) {
  std::set<std::pair<Eigen::Index, Eigen::Index>> s;
  for (const Edge& e : g.edges) s.insert({e.source, e.target});
  return s;
}

// Exhaustive k-smallest selection by full stable sort of every row.
std::set<std::pair<Eigen::Index, Eigen::Index>> brute_knn(const Eigen::Matrix2Xd& p, int k) {
  std::set<std::pair<Eigen::Index, Eigen::Index>> s;
  for (Eigen::Index i = 0; i < p.cols(); ++i) {
    std::vector<Eigen::Index> order;
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (j != i) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double da = (p.col(a) - p.col(i)).squaredNorm(), db = (p.col(b) - p.col(i)).squaredNorm();
      return da < db;
    });
    for (int m = 0; m < k; ++m) s.insert({i, order[m]});
  }
  return s;
}

ConnectivityGraph chain(Eigen::Index n) {
  ConnectivityGraph g{n, {}};
  for (Eigen::Index i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1, 1.0});
  return g;
}

}  // namespace

TEST_CASE("distance_matrix") {
  Eigen::Matrix2Xd one(2, 1);
  one << 3, 4;
  CHECK(distance_matrix(one) == Eigen::MatrixXd::Zero(1, 1));

  Eigen::Matrix2Xd two(2, 2);
  two << 0, 3, 0, 4;
  const Eigen::MatrixXd d2 = distance_matrix(two);
  CHECK(d2(0, 1) == 5.0);
  CHECK(d2(1, 0) == 5.0);

  const Eigen::Matrix2Xd p = oracle::random_sites(100, 50, 50, 3);
  const Eigen::MatrixXd d = distance_matrix(p);
  double worst = 0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) {
      const double dx = p(0, i) - p(0, j), dy = p(1, i) - p(1, j);
      worst = std::max(worst, std::abs(d(i, j) - std::sqrt(dx * dx + dy * dy)));
    }
  CHECK(worst <= 1e-12);
  CHECK(d.isApprox(d.transpose()));

  const Eigen::MatrixXf single = distance_matrix(p.cast<float>());
  CHECK(single.rows() == 100);
}

TEST_CASE("knn_graph") {
  SUBCASE("collinear example") {
    Eigen::Matrix2Xd p(2, 3);
    p << 0, 1, 3, 0, 0, 0;
    const auto g = knn_graph(p, 1);
    CHECK(edge_set(g) == std::set<std::pair<Eigen::Index, Eigen::Index>>{{0, 1}, {1, 0}, {2, 1}});
    CHECK(g.edges[2].length == 2.0);
  }
  SUBCASE("complete graph at k = n-1") {
    const Eigen::Matrix2Xd p = oracle::random_sites(12, 10, 10, 1);
    const auto g = knn_graph(p, 11);
    CHECK(g.edges.size() == 132);
    for (const Edge& e : g.edges) CHECK(e.source != e.target);
  }
  SUBCASE("ties prefer lower index") {
    Eigen::Matrix2Xd p(2, 5);
    p << 0, 1, -1, 0, 0, 0, 0, 0, 1, -1;
    const auto g = knn_graph(p, 2);
    CHECK(edge_set(g).count({0, 1}) == 1);
    CHECK(edge_set(g).count({0, 2}) == 1);
  }
  SUBCASE("k out of range") {
    const Eigen::Matrix2Xd p = oracle::random_sites(5, 10, 10, 1);
    CHECK(catch_error([&] { knn_graph(p, 0); }).code == ErrorCode::invalid_parameter);
    CHECK(catch_error([&] { knn_graph(p, 5); }).code == ErrorCode::invalid_parameter);
  }
  SUBCASE("stippled cells against exhaustive selection") {
    const DensityMap d = linear_gradient(120, 120, 0.1, 1.0);
    const SiteSet s = stipple(d, 500, {20, 9, {}});
    const auto g = knn_graph(s.positions, 5);
    CHECK(edge_set(g) == brute_knn(s.positions, 5));
    for (Eigen::Index deg : g.out_degrees()) CHECK(deg == 5);
    for (const Edge& e : g.edges) CHECK(e.length == (s[e.target] - s[e.source]).norm());
    // argmin invariance under uniform scaling
    CHECK(edge_set(knn_graph(3.7 * s.positions, 5)) == edge_set(g));
  }
}

TEST_CASE("symmetrize and induced_subgraph") {
  const auto g = symmetrize(chain(3));
  CHECK(edge_set(g) == std::set<std::pair<Eigen::Index, Eigen::Index>>{{0, 1}, {1, 0}, {1, 2}, {2, 1}});
  const auto h = induced_subgraph(g, {true, true, false});
  CHECK(edge_set(h) == std::set<std::pair<Eigen::Index, Eigen::Index>>{{0, 1}, {1, 0}});
}

TEST_CASE("shortest_hop_path") {
  const std::vector<Eigen::Index> zero{0}, three{3};
  SUBCASE("same set") {
    const auto p = shortest_hop_path(chain(4), three, three);
    CHECK(p.hops == 0);
    CHECK(p.path == std::vector<Eigen::Index>{3});
  }
  SUBCASE("chain") {
    const auto p = shortest_hop_path(chain(4), zero, three);
    CHECK(p.hops == 3);
    CHECK(p.path == std::vector<Eigen::Index>{0, 1, 2, 3});
  }
  SUBCASE("direction matters") {
    CHECK(catch_error([&] { shortest_hop_path(chain(4), three, zero); }).code == ErrorCode::unreachable);
  }
  SUBCASE("lexicographically smallest of equal paths") {
    ConnectivityGraph g{5, {{0, 3, 1}, {0, 2, 1}, {3, 4, 1}, {2, 4, 1}, {1, 4, 1}}};
    const std::vector<Eigen::Index> src{1, 0}, dst{4};
    auto p = shortest_hop_path(g, src, dst);
    CHECK(p.path == std::vector<Eigen::Index>{1, 4});
    const std::vector<Eigen::Index> only0{0};
    p = shortest_hop_path(g, only0, dst);
    CHECK(p.path == std::vector<Eigen::Index>{0, 2, 4});
  }
  SUBCASE("hop count is label free") {
    const Eigen::Matrix2Xd pts = oracle::random_sites(300, 60, 60, 17);
    const auto g = knn_graph(pts, 4);
    const std::vector<bool> all;
    const auto bands = edge_bands(pts, all, 0.1);
    const auto base = shortest_hop_path(g, bands.top, bands.bottom);

    std::vector<Eigen::Index> perm(300);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(4);
    for (Eigen::Index i = 299; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    Eigen::Matrix2Xd shuffled(2, 300);
    for (int i = 0; i < 300; ++i) shuffled.col(perm[i]) = pts.col(i);
    const auto g2 = knn_graph(shuffled, 4);
    const auto bands2 = edge_bands(shuffled, all, 0.1);
    CHECK(shortest_hop_path(g2, bands2.top, bands2.bottom).hops == base.hops);
    for (std::size_t k = 0; k + 1 < base.path.size(); ++k)
      CHECK(edge_set(g).count({base.path[k], base.path[k + 1]}) == 1);
  }
}

TEST_CASE("propagation on a gradient stippling") {
  const DensityMap d = linear_gradient(600, 600, 0.0, 1.0);
  const SiteSet s = stipple(d, 1000, {50, 0, {}});
  const auto g = knn_graph(s.positions, 5);
  const auto r = measure_propagation(s.positions, g);
  CHECK(r.sparse == 0);
  CHECK(r.dense == 2);
  CHECK(r.third[0].mean_edge_length > r.third[2].mean_edge_length);
  REQUIRE(r.third[0].hops > 0);
  REQUIRE(r.third[2].hops > 0);
  CHECK(r.third[0].hops < r.third[2].hops);
  MESSAGE("hops sparse=" << r.third[0].hops << " dense=" << r.third[2].hops);
}
