#include "cellscape/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "cellscape/conformal.hpp"
#include "cellscape/cvt.hpp"
#include "cellscape/image_io.hpp"
#include "cellscape/random.hpp"
#include "cellscape/structures.hpp"
#include "cellscape/svg.hpp"

namespace cellscape {

namespace fs = std::filesystem;

namespace {

struct Reference {
  const char* key;
  std::vector<std::string> types;
  bool required = true;
};

struct KindInfo {
  std::string output;
  std::vector<Reference> references;
  std::vector<std::string> keys;  // scalar parameters
};

const std::vector<std::string> kPopulationLike{"population", "sites"};

const std::map<std::string, KindInfo>& kinds() {
  static const std::map<std::string, KindInfo> table{
      {"linear_gradient", {"density", {}, {"width", "height", "lo", "hi"}}},
      {"radial_gradient", {"density", {}, {"width", "height", "lo", "hi"}}},
      {"annulus", {"density", {}, {"width", "height", "radius", "sigma", "floor"}}},
      {"image", {"density", {}, {"path"}}},
      {"threshold", {"density", {{"from", {"density"}}}, {"t"}}},
      {"resize", {"density", {{"from", {"density"}}}, {"cells", "area_per_cell"}}},
      {"carve", {"density", {{"from", {"density"}}, {"centers", kPopulationLike}}, {"radius_min", "radius_max"}}},
      {"stipple", {"sites", {{"from", {"density"}}}, {"cells", "iterations"}}},
      {"place",
       {"population", {}, {"spec", "total", "iterations", "role_radius", "scale", "area_per_cell", "tolerance"}}},
      {"grid_population", {"population", {}, {"side", "width"}}},
      {"population", {"population", {{"from", {"sites"}}}, {}}},
      {"connect", {"graph", {{"from", kPopulationLike}}, {"k", "undirected"}}},
      {"propagation", {"report", {{"from", kPopulationLike}, {"graph", {"graph"}}}, {"band"}}},
      {"quartiles", {"report", {{"from", kPopulationLike}}, {"axis"}}},
      {"simulate", {"activity", {{"from", kPopulationLike}}, {"params", "steps"}}},
      {"turing", {"report", {{"from", kPopulationLike}, {"activity", {"activity"}}}, {"bins"}}},
      {"render",
       {"image",
        {{"from", kPopulationLike}, {"values", {"activity"}, false}},
        {"style", "scale", "bins", "upsample", "colormap", "borders", "mode", "radius", "normalize"}}},
      {"map", {"grid", {}, {"shape", "family", "lines", "samples", "nodes", "z0"}}},
  };
  return table;
}

struct StageConfig {
  std::size_t index = 0;
  std::string name;
  std::string kind;
  std::string as;
  std::optional<std::string> out;
  std::uint64_t seed_key = 0;
  toml::table table;
};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::config, "pipeline: " + msg); }

// Typed access to one stage's parameters with errors that name the stage.
class Params {
 public:
  Params(const StageConfig& stage, const fs::path& base) : stage_(stage), base_(base) {}

  double real(const char* key, std::optional<double> fallback = std::nullopt) const {
    const auto node = stage_.table[key];
    if (!node) return require(fallback, key);
    const auto v = node.value<double>();
    if (!v) fail(key, "must be a number");
    return *v;
  }
  std::int64_t integer(const char* key, std::optional<std::int64_t> fallback = std::nullopt) const {
    const auto node = stage_.table[key];
    if (!node) return require(fallback, key);
    if (!node.is_integer()) fail(key, "must be an integer");
    return *node.value<std::int64_t>();
  }
  std::int64_t count(const char* key, std::optional<std::int64_t> fallback = std::nullopt, std::int64_t min = 1) const {
    const std::int64_t v = integer(key, fallback);
    if (v < min) fail(key, "must be at least " + std::to_string(min));
    return v;
  }
  bool flag(const char* key, bool fallback) const {
    const auto node = stage_.table[key];
    if (!node) return fallback;
    if (!node.is_boolean()) fail(key, "must be true or false");
    return *node.value<bool>();
  }
  std::string text(const char* key, std::optional<std::string> fallback = std::nullopt) const {
    const auto node = stage_.table[key];
    if (!node) return require(fallback, key);
    if (!node.is_string()) fail(key, "must be a string");
    return *node.value<std::string>();
  }
  fs::path path(const char* key) const {
    const fs::path p = text(key);
    return p.is_absolute() ? p : base_ / p;
  }
  bool has(const char* key) const { return stage_.table.contains(key); }
  const toml::node* node(const char* key) const { return stage_.table.get(key); }

  [[noreturn]] void fail(const char* key, const std::string& what) const {
    throw Error(ErrorCode::config, std::string(key) + " " + what);
  }

 private:
  template <typename T>
  T require(const std::optional<T>& fallback, const char* key) const {
    if (!fallback) fail(key, "is required");
    return *fallback;
  }

  const StageConfig& stage_;
  fs::path base_;
};

std::string hex_identity(Identity id) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%06x", id);
  return buf;
}

Population as_population(const Artifact& a) {
  if (const auto* p = std::get_if<Population>(&a)) return *p;
  return population_from_table(std::get<SiteTable>(a));
}

Eigen::Matrix2Xd positions_of(const Artifact& a) {
  if (const auto* p = std::get_if<Population>(&a)) return p->positions();
  return std::get<SiteTable>(a).positions;
}

// Domain extent of a population-like artifact.
Eigen::Vector2d extent_of(const Artifact& a) {
  if (const auto* p = std::get_if<Population>(&a)) return {p->width, p->height};
  const auto& s = std::get<SiteTable>(a);
  return {double(s.width), double(s.height)};
}

Colormap pick_colormap(const std::string& name, const Params& p) {
  if (name == "viridis") return Colormap::viridis();
  if (name == "grayscale") return Colormap::grayscale();
  return parse_colormap(read_text(p.path("colormap")));
}

SiteTable site_table(const SiteSet& sites, const DensityArtifact& d) {
  SiteTable t;
  t.width = d.density.width();
  t.height = d.density.height();
  t.scale_x = d.scale_x;
  t.scale_y = d.scale_y;
  t.positions = sites.positions;
  t.identity.resize(sites.size());
  for (Eigen::Index i = 0; i < sites.size(); ++i) {
    const int x = std::clamp(static_cast<int>(sites.positions(0, i)), 0, t.width - 1);
    const int y = std::clamp(static_cast<int>(sites.positions(1, i)), 0, t.height - 1);
    t.identity[i] = d.identity.width() > 0 ? d.identity.id(y, x) : 0;
  }
  return t;
}

DensityArtifact generated(DensityMap d) {
  DensityArtifact a;
  a.identity = IdentityMap(d.width(), d.height(), 0);
  a.density = std::move(d);
  return a;
}

class Runner {
 public:
  Runner(const StageConfig& stage, const fs::path& base, std::uint64_t seed,
         const std::map<std::string, Artifact>& artifacts, StageResult& result)
      : stage_(stage), p_(stage, base), seed_(seed), artifacts_(artifacts), result_(result) {}

  Artifact run() {
    const std::string& k = stage_.kind;
    if (k == "linear_gradient" || k == "radial_gradient") {
      const int w = static_cast<int>(p_.count("width")), h = static_cast<int>(p_.count("height"));
      const double lo = p_.real("lo", 0.0), hi = p_.real("hi", 1.0);
      return generated(k == "linear_gradient" ? linear_gradient(w, h, lo, hi) : radial_gradient(w, h, lo, hi));
    }
    if (k == "annulus")
      return generated(annulus(static_cast<int>(p_.count("width")), static_cast<int>(p_.count("height")),
                               p_.real("radius", 0.3), p_.real("sigma", 0.06), p_.real("floor", 0.2)));
    if (k == "image") {
      DecodedMaps maps = decode(read_png(p_.path("path")));
      return DensityArtifact{std::move(maps.density), std::move(maps.identity), 1.0, 1.0, {}, {}};
    }
    if (k == "threshold") {
      DensityArtifact d = input<DensityArtifact>("from");
      d.density = apply_threshold(d.density, p_.real("t"));
      return d;
    }
    if (k == "resize") {
      const DensityArtifact& d = input<DensityArtifact>("from");
      const auto r = resize_for_population(d.density, d.identity, static_cast<std::size_t>(p_.count("cells")),
                                           p_.real("area_per_cell", 500.0));
      return DensityArtifact{r.density, r.identity, d.scale_x * r.scale_x, d.scale_y * r.scale_y, {}, {}};
    }
    if (k == "carve") return carve();
    if (k == "stipple") {
      const DensityArtifact& d = input<DensityArtifact>("from");
      StippleOptions opt;
      opt.iterations = static_cast<int>(p_.count("iterations", 50, 0));
      opt.seed = seed_;
      return site_table(stipple(d.density, p_.count("cells"), opt), d);
    }
    if (k == "place") {
      PlacementOptions opt;
      opt.iterations = static_cast<int>(p_.count("iterations", 50, 0));
      opt.seed = seed_;
      opt.role_radius = p_.real("role_radius", 0.0);
      opt.scale = p_.real("scale", 0.0);
      opt.area_per_cell = p_.real("area_per_cell", 500.0);
      const SpecDocument spec = read_spec(p_.path("spec"), p_.real("tolerance", 0.25));
      Placement placed = place_all(spec, p_.count("total"), opt);
      result_.warnings.insert(result_.warnings.end(), placed.allocation.warnings.begin(),
                              placed.allocation.warnings.end());
      for (const auto& [id, n] : placed.allocation.counts) result_.metrics["cells_" + hex_identity(id)] = double(n);
      result_.metrics["raster_scale"] = placed.scale;
      return std::move(placed.population);
    }
    if (k == "grid_population") {
      const auto side = p_.count("side");
      const double width = p_.real("width", 1.0);
      Population pop{width, width, {}};
      for (std::int64_t y = 0; y < side; ++y)
        for (std::int64_t x = 0; x < side; ++x) {
          Cell c;
          c.index = pop.size();
          c.position = Point((x + 0.5) / side, (y + 0.5) / side) * width;
          pop.cells.push_back(c);
        }
      return pop;
    }
    if (k == "population") return population_from_table(input<SiteTable>("from"));
    if (k == "connect") {
      ConnectivityGraph g = knn_graph(positions_of(any("from")), p_.count("k", 5));
      return p_.flag("undirected", false) ? symmetrize(g) : g;
    }
    if (k == "propagation") return propagation();
    if (k == "quartiles") return quartiles();
    if (k == "simulate") return field_run();
    if (k == "turing") {
      const Population pop = as_population(any("from"));
      const auto& act = input<ActivityRecord>("activity");
      const int bins = static_cast<int>(p_.count("bins", 40));
      const auto hist = activity_histogram(pop, act.mean_activity, bins, bins);
      const auto peak = secondary_peak(radial_autocorrelation(hist.means));
      return Report{{"peak_found", peak.found ? 1.0 : 0.0},
                    {"peak_radius", double(peak.radius)},
                    {"peak_value", peak.value},
                    {"empty_bins", double(hist.empty.count())}};
    }
    if (k == "render") return render();
    if (k == "map") return grid();
    throw Error(ErrorCode::config, "unknown stage kind " + k);
  }

 private:
  template <typename T>
  const T& input(const char* key) const {
    return std::get<T>(any(key));
  }
  const Artifact& any(const char* key) const { return artifacts_.at(*stage_.table[key].value<std::string>()); }

  Artifact carve() {
    DensityArtifact d = input<DensityArtifact>("from");
    const Artifact& centers = any("centers");
    const Eigen::Vector2d extent = extent_of(centers);
    const Eigen::Matrix2Xd pts = positions_of(centers);
    const double sx = d.density.width() / extent.x(), sy = d.density.height() / extent.y();
    const double rmin = p_.real("radius_min"), rmax = p_.real("radius_max", rmin);
    if (rmin < 0.0 || rmax < rmin) p_.fail("radius_max", "must satisfy 0 <= radius_min <= radius_max");
    Rng rng(seed_);
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      d.hole_centers.emplace_back(pts(0, i) * sx, pts(1, i) * sy);
      d.hole_radii.push_back(rng.uniform(rmin, rmax));
    }
    d.density = carve_holes(d.density, d.hole_centers, d.hole_radii);
    result_.metrics["holes"] = double(d.hole_radii.size());
    return d;
  }

  Artifact propagation() {
    const Eigen::Matrix2Xd pts = positions_of(any("from"));
    const auto rep = measure_propagation(pts, input<ConnectivityGraph>("graph"), p_.real("band", 0.05));
    Report r;
    for (int t = 0; t < 3; ++t) {
      const std::string prefix = "third" + std::to_string(t) + "_";
      r[prefix + "cells"] = double(rep.third[t].cells);
      r[prefix + "hops"] = double(rep.third[t].hops);
      r[prefix + "mean_edge"] = rep.third[t].mean_edge_length;
    }
    r["sparse_third"] = rep.sparse;
    r["dense_third"] = rep.dense;
    r["sparse_hops"] = double(rep.third[rep.sparse].hops);
    r["dense_hops"] = double(rep.third[rep.dense].hops);
    return r;
  }

  Artifact quartiles() {
    const Artifact& a = any("from");
    const Eigen::Matrix2Xd pts = positions_of(a);
    const std::string axis = p_.text("axis", std::string("x"));
    if (axis != "x" && axis != "y") p_.fail("axis", "must be \"x\" or \"y\"");
    const int row = axis == "x" ? 0 : 1;
    const double extent = extent_of(a)[row];
    std::array<Eigen::Index, 4> counts{};
    for (Eigen::Index i = 0; i < pts.cols(); ++i)
      ++counts[std::clamp(static_cast<int>(std::floor(4.0 * pts(row, i) / extent)), 0, 3)];
    Report r{{"cells", double(pts.cols())}};
    for (int q = 0; q < 4; ++q) {
      r["q" + std::to_string(q + 1) + "_count"] = double(counts[q]);
      r["q" + std::to_string(q + 1)] = pts.cols() ? double(counts[q]) / pts.cols() : 0.0;
    }
    return r;
  }

  Artifact field_run() {
    const Population pop = as_population(any("from"));
    FieldParams params;
    if (const toml::node* n = p_.node("params"); n && n->is_table()) {
      std::ostringstream ss;
      ss << *n->as_table();
      params = parse_field_params(ss.str());
    } else {
      params = read_field_params(p_.path("params"));
    }
    const auto steps = static_cast<std::uint64_t>(p_.count("steps", 1000));
    const auto sim = simulate(pop, params, steps, seed_);
    result_.metrics["mean_activity"] = sim.mean_activity.size() ? sim.mean_activity.mean() : 0.0;
    return ActivityRecord{sim.mean_activity, sim.state.u, steps, seed_, sim.state.t};
  }

  Artifact render() {
    const Population pop = as_population(any("from"));
    RenderRequest req;
    req.style = parse_render_style(p_.text("style", std::string("discs")));
    const std::string cmap = p_.text("colormap", std::string("viridis"));
    req.colormap = cmap == "random" ? std::nullopt : std::optional<Colormap>(pick_colormap(cmap, p_));
    req.scale = p_.real("scale", 1.0);
    req.bins = static_cast<int>(p_.count("bins", 32));
    req.upsample = static_cast<int>(p_.count("upsample", 8));
    req.borders = p_.flag("borders", false);
    req.radius = p_.real("radius", 0.0);
    req.normalize = p_.flag("normalize", true);
    req.seed = seed_;
    const std::string mode = p_.text("mode", std::string("color"));
    if (mode != "color" && mode != "radius") p_.fail("mode", "must be \"color\" or \"radius\"");
    req.mode = mode == "color" ? DiscMode::color : DiscMode::radius;
    const Eigen::VectorXd* values = p_.has("values") ? &input<ActivityRecord>("values").mean_activity : nullptr;
    return render_population(pop, values, req);
  }

  Artifact grid() {
    const Polyline outline = shape_boundary(read_svg(p_.path("shape")));
    std::optional<Complex> z0;
    if (const toml::node* n = p_.node("z0")) {
      const toml::array* arr = n->as_array();
      if (!arr || arr->size() != 2 || !(*arr)[0].value<double>() || !(*arr)[1].value<double>())
        p_.fail("z0", "must be [x, y]");
      z0 = Complex(*(*arr)[0].value<double>(), *(*arr)[1].value<double>());
    }
    const DiscMap map = polygon_map(outline, p_.count("nodes", 256), z0);
    const std::string family = p_.text("family", std::string("polar"));
    if (family != "polar" && family != "cartesian") p_.fail("family", "must be \"polar\" or \"cartesian\"");
    GridRecord g;
    g.family = family == "polar" ? GridFamily::polar : GridFamily::cartesian;
    g.lines = map_grid(map, g.family, static_cast<int>(p_.count("lines", 12)), static_cast<int>(p_.count("samples", 64)));
    result_.metrics["reciprocal_condition"] = map.reciprocal_condition();
    result_.metrics["reproducing_residual"] = map.reproducing_residual();
    return g;
  }

  const StageConfig& stage_;
  Params p_;
  std::uint64_t seed_;
  const std::map<std::string, Artifact>& artifacts_;
  StageResult& result_;
};

void record_metrics(const Artifact& a, StageResult& r) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DensityArtifact>) {
          r.metrics["width"] = v.density.width();
          r.metrics["height"] = v.density.height();
          r.metrics["mass"] = v.density.mass();
        } else if constexpr (std::is_same_v<T, SiteTable>) {
          r.metrics["cells"] = double(v.positions.cols());
        } else if constexpr (std::is_same_v<T, Population>) {
          r.metrics["cells"] = double(v.size());
        } else if constexpr (std::is_same_v<T, ConnectivityGraph>) {
          r.metrics["cells"] = double(v.n);
          r.metrics["edges"] = double(v.edges.size());
        } else if constexpr (std::is_same_v<T, ActivityRecord>) {
          r.metrics["cells"] = double(v.mean_activity.size());
        } else if constexpr (std::is_same_v<T, RasterImage>) {
          r.metrics["width"] = v.width;
          r.metrics["height"] = v.height;
        } else if constexpr (std::is_same_v<T, GridRecord>) {
          r.metrics["lines"] = double(v.lines.size());
        } else {
          for (const auto& [key, value] : v) r.metrics[key] = value;
        }
      },
      a);
}

void write_artifact(const Artifact& a, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DensityArtifact>) {
          write_png(path, encode(v.density, v.identity));
        } else if constexpr (std::is_same_v<T, SiteTable>) {
          write_text(path, dump_sites(v));
        } else if constexpr (std::is_same_v<T, Population>) {
          write_text(path, dump_population(v));
        } else if constexpr (std::is_same_v<T, ConnectivityGraph>) {
          write_text(path, dump_graph(v));
        } else if constexpr (std::is_same_v<T, ActivityRecord>) {
          write_text(path, dump_activity(v));
        } else if constexpr (std::is_same_v<T, RasterImage>) {
          write_png(path, v);
        } else if constexpr (std::is_same_v<T, GridRecord>) {
          write_text(path, dump_grid(v));
        } else {
          nlohmann::json j{{"format", kFormatVersion}, {"kind", "report"}, {"values", v}};
          write_text(path, j.dump() + "\n");
        }
      },
      a);
}

}  // namespace

std::string artifact_type(const Artifact& a) {
  static const char* names[] = {"density", "sites", "population", "graph", "activity", "image", "grid", "report"};
  return names[a.index()];
}

struct PipelineConfig {
  std::string name;
  std::uint64_t seed = 0;
  fs::path base_dir;
  fs::path output_dir;
  std::vector<StageConfig> stages;
};

Pipeline::Pipeline(std::unique_ptr<PipelineConfig> config) : config_(std::move(config)) {}
Pipeline::Pipeline(Pipeline&&) noexcept = default;
Pipeline& Pipeline::operator=(Pipeline&&) noexcept = default;
Pipeline::~Pipeline() = default;

const std::string& Pipeline::name() const { return config_->name; }
std::size_t Pipeline::stage_count() const { return config_->stages.size(); }

Pipeline Pipeline::parse(const std::string& text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream ss;
    ss << e.description() << " at line " << e.source().begin.line;
    config_error(ss.str());
  }
  static const std::set<std::string> top_keys{"format", "name", "seed", "output_dir", "stage"};
  for (const auto& [key, value] : root)
    if (!top_keys.count(std::string(key.str()))) config_error("unknown top-level key " + std::string(key.str()));
  if (const auto f = root["format"].value<std::int64_t>(); !f || *f != kFormatVersion)
    config_error("format = 1 is required");

  auto cfg = std::make_unique<PipelineConfig>();
  cfg->name = root["name"].value_or(std::string("pipeline"));
  if (root.contains("seed")) {
    const auto s = root["seed"].value<std::int64_t>();
    if (!s || *s < 0) config_error("seed must be a non-negative integer");
    cfg->seed = static_cast<std::uint64_t>(*s);
  }
  cfg->base_dir = base_dir;
  cfg->output_dir = root["output_dir"].value_or(std::string("."));

  std::map<std::string, std::string> produced;  // artifact name -> type
  if (const toml::node* stages = root.get("stage")) {
    const toml::array* arr = stages->as_array();
    if (!arr) config_error("stage must be an array of tables ([[stage]])");
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const toml::table* t = (*arr)[i].as_table();
      if (!t) config_error("stage " + std::to_string(i) + " is not a table");
      StageConfig s;
      s.index = i;
      s.table = *t;
      const auto kind = (*t)["kind"].value<std::string>();
      if (!kind) config_error("stage " + std::to_string(i) + " has no kind");
      s.kind = *kind;
      s.name = (*t)["name"].value_or(s.kind + "_" + std::to_string(i));
      const std::string where = "stage '" + s.name + "'";
      const auto info = kinds().find(s.kind);
      if (info == kinds().end()) config_error(where + ": unknown kind " + s.kind);
      s.as = (*t)["as"].value_or(s.name);
      if (const auto out = (*t)["out"].value<std::string>()) s.out = *out;
      if (t->contains("seed")) {
        const auto v = (*t)["seed"].value<std::int64_t>();
        if (!v || *v < 0) config_error(where + ": seed must be a non-negative integer");
        s.seed_key = static_cast<std::uint64_t>(*v);
      } else {
        s.seed_key = i;
      }

      std::set<std::string> allowed{"kind", "name", "as", "out", "seed"};
      for (const auto& k : info->second.keys) allowed.insert(k);
      for (const auto& r : info->second.references) allowed.insert(r.key);
      for (const auto& [key, value] : *t)
        if (!allowed.count(std::string(key.str())))
          config_error(where + ": unknown key " + std::string(key.str()) + " for kind " + s.kind);

      for (const Reference& r : info->second.references) {
        const auto ref = (*t)[r.key].value<std::string>();
        if (!ref) {
          if (r.required) config_error(where + ": missing reference " + r.key);
          continue;
        }
        const auto found = produced.find(*ref);
        if (found == produced.end())
          config_error(where + ": " + r.key + " refers to '" + *ref + "', which no earlier stage produces");
        if (std::find(r.types.begin(), r.types.end(), found->second) == r.types.end())
          config_error(where + ": " + r.key + " needs a " + r.types.front() + " but '" + *ref + "' is a " +
                       found->second);
      }
      produced[s.as] = info->second.output;
      cfg->stages.push_back(std::move(s));
    }
  }
  return Pipeline(std::move(cfg));
}

Pipeline Pipeline::load(const fs::path& path) {
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse(read_text(path), base);
}

PipelineResult Pipeline::run(const PipelineOptions& options) const {
  PipelineResult result;
  result.name = config_->name;
  const std::uint64_t global = options.seed.value_or(config_->seed);
  const fs::path out_dir = options.output_dir.value_or(config_->output_dir);
  for (const StageConfig& stage : config_->stages) {
    StageResult r;
    r.name = stage.name;
    r.kind = stage.kind;
    r.type = kinds().at(stage.kind).output;
    r.seed = derive_seed({global, stage.seed_key});
    const auto start = std::chrono::steady_clock::now();
    try {
      Artifact a = Runner(stage, config_->base_dir, r.seed, result.artifacts, r).run();
      record_metrics(a, r);
      if (stage.out && options.write_files) {
        const fs::path target = out_dir / *stage.out;
        write_artifact(a, target);
        r.files.push_back(target.string());
      }
      result.artifacts.insert_or_assign(stage.as, std::move(a));
    } catch (const Error& e) {
      throw Error(e.code(), "stage '" + stage.name + "' (" + stage.kind + "): " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::io, "stage '" + stage.name + "' (" + stage.kind + "): " + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.stages.push_back(std::move(r));
  }
  return result;
}

std::string summary_json(const PipelineResult& result) {
  nlohmann::json stages = nlohmann::json::array();
  for (const StageResult& s : result.stages)
    stages.push_back({{"name", s.name},
                      {"kind", s.kind},
                      {"type", s.type},
                      {"seed", s.seed},
                      {"seconds", s.seconds},
                      {"metrics", s.metrics},
                      {"files", s.files},
                      {"warnings", s.warnings}});
  nlohmann::json j{{"format", kFormatVersion}, {"kind", "pipeline-summary"}, {"name", result.name}, {"stages", stages}};
  return j.dump(2) + "\n";
}

}  // namespace cellscape
