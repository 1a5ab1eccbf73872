// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "cellscape/conformal.hpp"
#include "cellscape/cvt.hpp"
#include "cellscape/formats.hpp"
#include "cellscape/geometry.hpp"
#include "cellscape/parallel.hpp"
#include "cellscape/pipeline.hpp"
#include "cellscape/structures.hpp"
#include "oracles.hpp"

using namespace cellscape;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string data(const std::string& name) { return std::string(CELLSCAPE_DATA_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cellscape_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

const std::vector<std::string> kShipped = {"gradient", "connectivity", "retina", "neural_field", "basal_ganglia", "map"};

// Shipped pipelines run once with one thread; reused by the criteria that
// read their artifacts.
std::map<std::string, PipelineResult> g_runs;

const PipelineResult& run(const std::string& name) {
  auto it = g_runs.find(name);
  if (it == g_runs.end()) {
    set_thread_count(1);
    it = g_runs.emplace(name, Pipeline::load(data(name + ".toml")).run({std::nullopt, scratch(name + "_t1"), true})).first;
    set_thread_count(0);
  }
  return it->second;
}

const StageResult& stage(const PipelineResult& r, const std::string& name) {
  for (const auto& s : r.stages)
    if (s.name == name) return s;
  throw Error(ErrorCode::invalid_input, "no stage " + name);
}

Outcome gradient_invariance() {
  const auto& r = run("gradient");
  const Report& a = r.get<Report>("quartiles_1000");
  const Report& b = r.get<Report>("quartiles_2500");
  double worst = 0.0;
  std::string detail;
  for (const char* q : {"q1", "q2", "q3", "q4"}) {
    const double gap = std::abs(a.at(q) - b.at(q));
    worst = std::max(worst, gap);
    detail += std::string(q) + " " + fmt(a.at(q), 4) + "/" + fmt(b.at(q), 4) + " ";
  }
  const double seconds = stage(r, "density_2500").seconds + stage(r, "sites_2500").seconds;
  detail += "max gap " + fmt(100 * worst, 3) + "pp, n=2500 stippling " + fmt(seconds, 3) + " s";
  return {worst <= 0.025 && seconds < 60.0, detail};
}

Outcome centroid_oracle() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DensityMap d = oracle::random_density(200, 200, 1000 + seed);
    const SiteSet sites(oracle::random_sites(50, 200, 200, 2000 + seed));
    const LabelMap labels = rasterize_voronoi(sites, 200, 200);
    const auto fast = weighted_centroids(labels, d, sites);
    const auto m = oracle::brute_moments(labels, d, 50);
    for (int i = 0; i < 50; ++i) {
      if (!(m.mass[i] > 0.0)) return {false, "fixture " + std::to_string(seed) + " has an empty cell"};
      worst = std::max(worst, std::abs(fast.sites[i].x() - m.mx[i] / m.mass[i]));
      worst = std::max(worst, std::abs(fast.sites[i].y() - m.my[i] / m.mass[i]));
    }
  }
  return {worst <= 1e-9, "20 fixtures, max coordinate error " + fmt(worst, 3)};
}

Outcome voronoi_oracle() {
  long long total = 0, equal = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int w = 120 + 17 * int(seed), h = 200 - 9 * int(seed), n = 10 + 12 * int(seed);
    const Eigen::Matrix2Xd p = oracle::random_sites(n, w, h, 300 + seed);
    const LabelMap fast = rasterize_voronoi(SiteSet(p), w, h);
    const LabelMap brute = oracle::brute_labels(p, w, h);
    total += static_cast<long long>(w) * h;
    equal += (fast.label == brute.label).count();
  }
  return {equal == total, "10 fixtures, " + std::to_string(equal) + "/" + std::to_string(total) + " pixels agree"};
}

Outcome lloyd_energy() {
  std::string detail;
  bool pass = true;
  const std::vector<std::pair<std::string, DensityMap>> fixtures = {{"uniform", DensityMap(200, 150, 1.0)},
                                                                    {"gradient", linear_gradient(200, 150, 0.0, 1.0)}};
  for (const auto& [name, d] : fixtures) {
    std::vector<double> energy;
    std::vector<bool> reseeded;
    StippleOptions opt;
    opt.iterations = 50;
    opt.seed = 17;
    opt.observer = [&](const IterationTrace& t) {
      energy.push_back(quantization_energy(t.labels, d, t.sites));
      reseeded.push_back(!t.moved.reseeded.empty());
    };
    const SiteSet final = stipple(d, 200, opt);
    energy.push_back(quantization_energy(rasterize_voronoi(final, d.width(), d.height()), d, final));
    int checked = 0, increases = 0;
    for (std::size_t k = 1; k < energy.size(); ++k) {
      if (reseeded[k - 1]) continue;
      ++checked;
      if (energy[k] > energy[k - 1] * (1 + 1e-9)) ++increases;
    }
    pass = pass && increases == 0 && checked > 0;
    detail += name + " " + fmt(energy.front(), 5) + " -> " + fmt(energy.back(), 5) + " (" + std::to_string(checked) +
              " rounds, " + std::to_string(increases) + " increases) ";
  }
  return {pass, detail};
}

double singular_ratio(const DiscMap& f, Complex z) {
  const double h = 1e-5;
  const Complex fx = (f(z + h) - f(z - h)) / (2 * h);
  const Complex fy = (f(z + Complex(0, h)) - f(z - Complex(0, h))) / (2 * h);
  Eigen::Matrix2d j;
  j << fx.real(), fy.real(), fx.imag(), fy.imag();
  const Eigen::Vector2d s = Eigen::JacobiSVD<Eigen::Matrix2d>(j).singularValues();
  return s(0) / s(1);
}

Outcome conformal_identity() {
  const BoundaryCurve circle = BoundaryCurve::ellipse(1, 1, 256);
  const DiscMap f = szego_map(circle, 0.0);
  double boundary = 0.0;
  for (Eigen::Index j = 0; j < circle.size(); ++j)
    boundary = std::max(boundary, std::abs(f.boundary_values()[j] - circle.z[j]));
  const double base = std::abs(f(0.0));

  std::vector<Complex> probes;
  for (int k = 0; k < 32; ++k) {
    const double r = 0.9 * (k % 4 + 1) / 4.0, t = 0.7 * k;
    probes.emplace_back(10 * r * std::cos(t), r * std::sin(t));
  }
  std::vector<DiscMap> maps;
  for (int m : {64, 128, 256, 512, 1024}) maps.push_back(szego_map(BoundaryCurve::ellipse(10, 1, m), 0.0));
  std::vector<double> residual;
  for (std::size_t i = 0; i + 1 < maps.size(); ++i) {
    double gap = 0.0;
    for (const Complex& p : probes) gap = std::max(gap, std::abs(maps[i](p) - maps[i + 1](p)));
    residual.push_back(gap);
  }
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < residual.size(); ++i) monotone = monotone && residual[i + 1] < residual[i];

  std::vector<Point> control;
  for (int k = 0; k < 24; ++k) {
    const double t = 2 * M_PI * k / 24, r = 1.0 + 0.3 * std::cos(3 * t) + 0.1 * std::sin(2 * t);
    control.emplace_back(r * std::cos(t) + 0.2, 0.7 * r * std::sin(t) - 0.1);
  }
  const DiscMap g = szego_map(BoundaryCurve::spline(control, 512), Complex(0.3, 0.0));
  Rng rng(8);
  double ratio = 1.0;
  for (int tested = 0; tested < 32;) {
    const Complex z(rng.uniform(-1.5, 1.5), rng.uniform(-1.2, 1.2));
    if (!g.contains(z) || g.boundary_distance(z) < 0.1) continue;
    ratio = std::max(ratio, singular_ratio(g, z));
    ++tested;
  }

  std::string detail = "circle max|f-z| " + fmt(boundary, 3) + ", |f(z0)| " + fmt(base, 3) + ", 10:1 ellipse residuals";
  for (double r : residual) detail += " " + fmt(r, 3);
  detail += " (m=64..1024), worst SV ratio " + fmt(ratio, 10);
  return {boundary < 1e-6 && base <= 1e-8 && monotone && ratio <= 1 + 1e-3, detail};
}

Outcome propagation_asymmetry() {
  const Report& r = run("connectivity").get<Report>("propagation");
  const double sparse = r.at("sparse_hops"), dense = r.at("dense_hops");
  const bool pass = sparse > 0 && dense > 0 && sparse < dense && dense >= 2 * sparse;
  return {pass, "k=5, 1000 cells: sparse third " + fmt(sparse) + " hops, dense third " + fmt(dense) + " hops, ratio " +
                    fmt(dense / sparse, 3)};
}

Outcome field_behavior() {
  const auto& r = run("neural_field");
  const Report& turing = r.get<Report>("grid_pattern");
  const bool peak = turing.at("peak_found") > 0 && turing.at("peak_radius") > 0;

  const auto& density = r.get<DensityArtifact>("torus_density").density;
  const SiteTable& sites = r.get<SiteTable>("torus_sites");
  const auto& act = r.get<ActivityRecord>("torus_activity").mean_activity;
  // Band: pixels above the midpoint between the density floor and peak.
  const double lo = density.rho.minCoeff(), hi = density.rho.maxCoeff(), mid = 0.5 * (lo + hi);
  double in = 0.0, out = 0.0;
  int nin = 0, nout = 0;
  for (Eigen::Index i = 0; i < sites.positions.cols(); ++i) {
    const int x = std::clamp(int(sites.positions(0, i)), 0, density.width() - 1);
    const int y = std::clamp(int(sites.positions(1, i)), 0, density.height() - 1);
    if (density.rho(y, x) > mid) {
      in += act[i];
      ++nin;
    } else {
      out += act[i];
      ++nout;
    }
  }
  const double band = nin ? in / nin : 0.0, outside = nout ? out / nout : 0.0;
  const bool torus = nin > 0 && nout > 0 && band > outside;
  return {peak && torus, "(a) grid autocorrelation peak at r=" + fmt(turing.at("peak_radius")) + " value " +
                             fmt(turing.at("peak_value"), 4) + "; (b) torus band " + fmt(band, 4) + " (" +
                             std::to_string(nin) + " cells) vs outside " + fmt(outside, 4) + " (" +
                             std::to_string(nout) + " cells)"};
}

Outcome placement() {
  const auto& r = run("basal_ganglia");
  const Population& pop = r.get<Population>("cells");
  const double scale = stage(r, "cells").metrics.at("raster_scale");
  const SpecDocument spec = read_spec(data("bg.svg"));
  const SpecRaster raster = rasterize_spec(spec, scale);
  const auto masses = structure_masses(raster.density, raster.identity);
  double total_mass = 0.0;
  for (const auto& [id, m] : masses) total_mass += m;

  std::map<Identity, long> counts;
  std::map<Identity, const StructureSpec*> by_id;
  for (const auto& s : spec.structures) by_id[s.identity] = &s;
  long inside = 0;
  for (const Cell& c : pop.cells) {
    ++counts[c.structure];
    const auto it = by_id.find(c.structure);
    if (it != by_id.end() && point_in_polygon(it->second->boundary.points, c.position)) ++inside;
  }
  const double total = double(pop.size());
  double worst = 0.0;
  std::string detail = "total " + fmt(total) + ":";
  for (const auto& [id, m] : masses) {
    const double share = total * m / total_mass;
    worst = std::max(worst, std::abs(counts[id] - share) / total);
    detail += " " + std::to_string(counts[id]) + "/" + fmt(share, 5);
  }
  detail += ", max deviation " + fmt(100 * worst, 3) + "% of total, " + std::to_string(inside) + "/" +
            std::to_string(pop.size()) + " inside their boundary";
  return {pop.size() == 2500 && worst <= 0.03 && inside == long(pop.size()), detail};
}

std::map<std::string, std::string> files_in(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_text(e.path());
  return out;
}

Outcome determinism() {
  long compared = 0;
  std::string mismatched;
  for (const auto& name : kShipped) {
    run(name);
    const fs::path first = fs::temp_directory_path() / ("cellscape_acceptance_" + name + "_t1");
    const fs::path second = scratch(name + "_t4");
    set_thread_count(4);
    Pipeline::load(data(name + ".toml")).run({std::nullopt, second, true});
    set_thread_count(0);
    const auto a = files_in(first), b = files_in(second);
    if (a.empty()) mismatched += " " + name + "(no files)";
    for (const auto& [file, bytes] : a) {
      ++compared;
      const auto it = b.find(file);
      if (it == b.end() || it->second != bytes) mismatched += " " + name + "/" + file;
    }
    if (a.size() != b.size()) mismatched += " " + name + "(file set)";
  }
  std::string detail = std::to_string(compared) + " files from " + std::to_string(kShipped.size()) +
                       " pipelines compared at 1 and 4 threads";
  if (!mismatched.empty()) detail += "; differing:" + mismatched;
  return {mismatched.empty(), detail};
}

Outcome retina() {
  const auto& r = run("retina");
  const SiteTable& cones = r.get<SiteTable>("cones");
  const DensityArtifact& carved = r.get<DensityArtifact>("rod_density");
  const SiteTable& rods = r.get<SiteTable>("rods");
  long violations = 0;
  double closest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < rods.positions.cols(); ++i) {
    const Eigen::Vector2d p = rods.positions.col(i);
    for (std::size_t h = 0; h < carved.hole_centers.size(); ++h) {
      const double d = (p - carved.hole_centers[h]).norm();
      closest = std::min(closest, d - carved.hole_radii[h]);
      if (d < carved.hole_radii[h]) ++violations;
    }
  }
  const bool shape = cones.positions.cols() == 25 && rods.positions.cols() == 2500 && carved.hole_centers.size() == 25;
  return {shape && violations == 0, std::to_string(cones.positions.cols()) + " cones, " +
                                        std::to_string(carved.hole_centers.size()) + " holes, " +
                                        std::to_string(rods.positions.cols()) + " rods, " +
                                        std::to_string(violations) + " rods inside a hole, nearest rod " +
                                        fmt(closest, 4) + " px outside its hole edge"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient invariance", gradient_invariance},
      {"centroid oracle", centroid_oracle},
      {"voronoi oracle", voronoi_oracle},
      {"lloyd energy", lloyd_energy},
      {"conformal identity", conformal_identity},
      {"propagation asymmetry", propagation_asymmetry},
      {"field behavior", field_behavior},
      {"multi-structure placement", placement},
      {"determinism", determinism},
      {"retina pipeline", retina},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
