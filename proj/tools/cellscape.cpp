#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cellscape/conformal.hpp"
#include "cellscape/connect.hpp"
#include "cellscape/cvt.hpp"
#include "cellscape/density.hpp"
#include "cellscape/field.hpp"
#include "cellscape/formats.hpp"
#include "cellscape/image_io.hpp"
#include "cellscape/parallel.hpp"
#include "cellscape/pipeline.hpp"
#include "cellscape/render.hpp"
#include "cellscape/structures.hpp"
#include "cellscape/svg.hpp"

using namespace cellscape;
namespace fs = std::filesystem;

namespace {

// Accepts either a population or a sites document.
Population load_population(const fs::path& path) {
  const std::string text = read_text(path);
  const auto kind = nlohmann::json::parse(text, nullptr, false).value("kind", std::string());
  if (kind == "sites") return population_from_table(parse_sites(text));
  return parse_population(text);
}

Colormap load_colormap(const std::string& name) {
  if (name == "viridis") return Colormap::viridis();
  if (name == "grayscale") return Colormap::grayscale();
  return parse_colormap(read_text(name));
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell placement, wiring, conformal grids and neural-field simulation from density images."};
  app.require_subcommand(0, 1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency); results do not depend on it");
  bool version = false;
  app.add_flag("--version", version, "Print the tool and file-format versions");

  // density
  auto* density_cmd = app.add_subcommand("density", "Decode, threshold and resize a density image");
  fs::path d_input, d_out, d_debug;
  double d_threshold = 1.0, d_area = 500.0;
  std::size_t d_cells = 0;
  density_cmd->add_option("--input", d_input, "RGBA PNG")->required()->check(CLI::ExistingFile);
  density_cmd->add_option("--threshold", d_threshold, "Alpha threshold t in (0, 1]");
  density_cmd->add_option("--cells", d_cells, "Resize so every cell gets area-per-cell pixels (0 = no resize)");
  density_cmd->add_option("--area-per-cell", d_area, "Pixels per cell");
  density_cmd->add_option("--out", d_out, "Output RGBA PNG")->required();
  density_cmd->add_option("--debug16", d_debug, "Also write rho as 16-bit grayscale");

  // stipple
  auto* stipple_cmd = app.add_subcommand("stipple", "Weighted Voronoi stippling of a density image");
  fs::path s_input, s_out;
  Eigen::Index s_cells = 0;
  int s_iterations = 50;
  std::uint64_t s_seed = 0;
  double s_threshold = 1.0;
  stipple_cmd->add_option("--input", s_input, "RGBA PNG")->required()->check(CLI::ExistingFile);
  stipple_cmd->add_option("--cells", s_cells, "Number of sites")->required();
  stipple_cmd->add_option("--iterations", s_iterations, "Lloyd rounds");
  stipple_cmd->add_option("--seed", s_seed, "Random seed");
  stipple_cmd->add_option("--threshold", s_threshold, "Alpha threshold applied first");
  stipple_cmd->add_option("--out", s_out, "sites.json")->required();

  // place
  auto* place_cmd = app.add_subcommand("place", "Place cells in the structures of an SVG spec");
  fs::path p_spec, p_out;
  Eigen::Index p_total = 0;
  PlacementOptions p_opt;
  double p_tolerance = 0.25;
  place_cmd->add_option("--spec", p_spec, "SVG structure spec")->required()->check(CLI::ExistingFile);
  place_cmd->add_option("--total", p_total, "Total cell count")->required();
  place_cmd->add_option("--seed", p_opt.seed, "Random seed");
  place_cmd->add_option("--role-radius", p_opt.role_radius, "Input/output tagging distance (document units)");
  place_cmd->add_option("--iterations", p_opt.iterations, "Lloyd rounds per structure");
  place_cmd->add_option("--scale", p_opt.scale, "Raster pixels per document unit (0 = automatic)");
  place_cmd->add_option("--tolerance", p_tolerance, "Curve flattening tolerance");
  place_cmd->add_option("--out", p_out, "population.json")->required();

  // connect
  auto* connect_cmd = app.add_subcommand("connect", "k-nearest-neighbour connectivity");
  fs::path c_population, c_out;
  Eigen::Index c_k = 5;
  bool c_undirected = false, c_report = false;
  double c_band = 0.05;
  connect_cmd->add_option("--population", c_population, "population.json or sites.json")
      ->required()
      ->check(CLI::ExistingFile);
  connect_cmd->add_option("--k", c_k, "Neighbours per cell");
  connect_cmd->add_flag("--undirected", c_undirected, "Symmetrize the graph");
  connect_cmd->add_flag("--report", c_report, "Print top-to-bottom hop counts per vertical third");
  connect_cmd->add_option("--band", c_band, "Edge band height as a fraction of the extent");
  connect_cmd->add_option("--out", c_out, "graph.json")->required();

  // map
  auto* map_cmd = app.add_subcommand("map", "Conformal map of a shape onto the disc and grid pullback");
  fs::path m_shape, m_out;
  std::string m_family = "polar";
  int m_lines = 12, m_samples = 64;
  Eigen::Index m_nodes = 256;
  std::vector<double> m_z0;
  map_cmd->add_option("--shape", m_shape, "SVG with one closed filled outline")->required()->check(CLI::ExistingFile);
  map_cmd->add_option("--family", m_family, "polar or cartesian")->check(CLI::IsMember({"polar", "cartesian"}));
  map_cmd->add_option("--lines", m_lines, "Grid lines per family");
  map_cmd->add_option("--samples", m_samples, "Samples per line");
  map_cmd->add_option("--nodes", m_nodes, "Boundary nodes");
  map_cmd->add_option("--z0", m_z0, "Base point x y (default: outline centroid)")->expected(2);
  map_cmd->add_option("--out", m_out, "grid.json")->required();

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Neural field on a population");
  fs::path f_population, f_params, f_out;
  std::uint64_t f_steps = 1000, f_seed = 0;
  sim_cmd->add_option("--population", f_population, "population.json or sites.json")
      ->required()
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--params", f_params, "field.toml")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--steps", f_steps, "Euler steps");
  sim_cmd->add_option("--seed", f_seed, "Input-noise seed");
  sim_cmd->add_option("--out", f_out, "activity.json")->required();

  // render
  auto* render_cmd = app.add_subcommand("render", "Discs, dual Voronoi or upsampled histogram image");
  fs::path r_population, r_values, r_out;
  std::string r_style = "discs", r_colormap = "viridis", r_mode = "color";
  RenderRequest r_req;
  bool r_raw = false;
  render_cmd->add_option("--population", r_population, "population.json or sites.json")
      ->required()
      ->check(CLI::ExistingFile);
  render_cmd->add_option("--values", r_values, "activity.json")->check(CLI::ExistingFile);
  render_cmd->add_option("--style", r_style, "discs, voronoi or histogram")
      ->check(CLI::IsMember({"discs", "voronoi", "histogram"}));
  render_cmd->add_option("--bins", r_req.bins, "Histogram bins per axis");
  render_cmd->add_option("--upsample", r_req.upsample, "Bicubic upsampling factor");
  render_cmd->add_option("--scale", r_req.scale, "Pixels per domain unit");
  render_cmd->add_option("--colormap", r_colormap, "viridis, grayscale, random or a colormap JSON file");
  render_cmd->add_option("--mode", r_mode, "Disc encoding: color or radius")->check(CLI::IsMember({"color", "radius"}));
  render_cmd->add_option("--radius", r_req.radius, "Disc radius in domain units (0 = automatic)");
  render_cmd->add_flag("--borders", r_req.borders, "Draw Voronoi borders");
  render_cmd->add_flag("--raw", r_raw, "Use values as given instead of min-max normalising");
  render_cmd->add_option("--seed", r_req.seed, "Seed for random colors");
  render_cmd->add_option("--out", r_out, "PNG")->required();

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run a TOML pipeline");
  fs::path pl_config, pl_out_dir, pl_summary;
  std::optional<std::uint64_t> pl_seed;
  bool pl_check = false;
  pipe_cmd->add_option("config", pl_config, "Pipeline TOML")->required()->check(CLI::ExistingFile);
  pipe_cmd->add_option("--seed", pl_seed, "Override the top-level seed");
  pipe_cmd->add_option("--out-dir", pl_out_dir, "Directory for stage outputs");
  pipe_cmd->add_option("--summary", pl_summary, "Also write the summary JSON here");
  pipe_cmd->add_flag("--check", pl_check, "Validate the configuration only");

  CLI11_PARSE(app, argc, argv);

  if (version) {
    std::cout << "cellscape " << CELLSCAPE_VERSION << " (file format " << kFormatVersion << ")\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 0;
  }
  set_thread_count(threads);

  try {
    if (*density_cmd) {
      DecodedMaps maps = decode(read_png(d_input));
      DensityMap rho = apply_threshold(maps.density, d_threshold);
      IdentityMap id = std::move(maps.identity);
      double scale = 1.0;
      if (d_cells > 0) {
        auto resized = resize_for_population(rho, id, d_cells, d_area);
        rho = std::move(resized.density);
        id = std::move(resized.identity);
        scale = resized.scale_x;
      }
      write_png(d_out, encode(rho, id));
      if (!d_debug.empty()) write_density_png16(d_debug, rho);
      print_json({{"width", rho.width()}, {"height", rho.height()}, {"scale", scale}, {"mass", rho.mass()}});
    } else if (*stipple_cmd) {
      DecodedMaps maps = decode(read_png(s_input));
      const DensityMap rho = apply_threshold(maps.density, s_threshold);
      StippleOptions opt;
      opt.iterations = s_iterations;
      opt.seed = s_seed;
      const SiteSet sites = stipple(rho, s_cells, opt);
      SiteTable table{rho.width(), rho.height(), 1.0, 1.0, sites.positions, {}};
      for (Eigen::Index i = 0; i < sites.size(); ++i) {
        const int x = std::clamp(static_cast<int>(sites.positions(0, i)), 0, rho.width() - 1);
        const int y = std::clamp(static_cast<int>(sites.positions(1, i)), 0, rho.height() - 1);
        table.identity.push_back(maps.identity.id(y, x));
      }
      write_text(s_out, dump_sites(table));
      print_json({{"cells", sites.size()}, {"width", rho.width()}, {"height", rho.height()}});
    } else if (*place_cmd) {
      const SpecDocument spec = read_spec(p_spec, p_tolerance);
      const Placement placed = place_all(spec, p_total, p_opt);
      write_text(p_out, dump_population(placed.population));
      nlohmann::json counts = nlohmann::json::object();
      for (const auto& [id, n] : placed.allocation.counts) {
        char hex[8];
        std::snprintf(hex, sizeof hex, "%06x", id);
        counts[hex] = n;
      }
      for (const auto& w : placed.allocation.warnings) std::cerr << "warning: " << w << "\n";
      print_json({{"cells", placed.population.size()}, {"scale", placed.scale}, {"counts", counts}});
    } else if (*connect_cmd) {
      const Population pop = load_population(c_population);
      ConnectivityGraph g = knn_graph(pop.positions(), c_k);
      if (c_undirected) g = symmetrize(g);
      write_text(c_out, dump_graph(g));
      nlohmann::json summary{{"cells", g.n}, {"edges", g.edges.size()}};
      if (c_report) {
        const auto rep = measure_propagation(pop.positions(), g, c_band);
        nlohmann::json thirds = nlohmann::json::array();
        for (const auto& t : rep.third)
          thirds.push_back({{"cells", t.cells}, {"hops", t.hops}, {"mean_edge_length", t.mean_edge_length}});
        summary["thirds"] = thirds;
        summary["sparse_third"] = rep.sparse;
        summary["dense_third"] = rep.dense;
      }
      print_json(summary);
    } else if (*map_cmd) {
      const Polyline outline = shape_boundary(read_svg(m_shape));
      std::optional<Complex> z0;
      if (m_z0.size() == 2) z0 = Complex(m_z0[0], m_z0[1]);
      const DiscMap map = polygon_map(outline, m_nodes, z0);
      GridRecord grid;
      grid.family = m_family == "polar" ? GridFamily::polar : GridFamily::cartesian;
      grid.lines = map_grid(map, grid.family, m_lines, m_samples);
      write_text(m_out, dump_grid(grid));
      print_json({{"lines", grid.lines.size()},
                  {"base_point", {map.base_point().real(), map.base_point().imag()}},
                  {"reciprocal_condition", map.reciprocal_condition()},
                  {"reproducing_residual", map.reproducing_residual()}});
    } else if (*sim_cmd) {
      const Population pop = load_population(f_population);
      const FieldParams params = read_field_params(f_params);
      const auto sim = simulate(pop, params, f_steps, f_seed);
      write_text(f_out, dump_activity({sim.mean_activity, sim.state.u, f_steps, f_seed, sim.state.t}));
      print_json({{"cells", pop.size()},
                  {"steps", f_steps},
                  {"mean_activity", sim.mean_activity.size() ? sim.mean_activity.mean() : 0.0}});
    } else if (*render_cmd) {
      const Population pop = load_population(r_population);
      std::optional<Eigen::VectorXd> values;
      if (!r_values.empty()) values = parse_activity(read_text(r_values)).mean_activity;
      r_req.style = parse_render_style(r_style);
      r_req.colormap = r_colormap == "random" ? std::nullopt : std::optional<Colormap>(load_colormap(r_colormap));
      r_req.mode = r_mode == "radius" ? DiscMode::radius : DiscMode::color;
      r_req.normalize = !r_raw;
      const RasterImage img = render_population(pop, values ? &*values : nullptr, r_req);
      write_png(r_out, img);
      print_json({{"width", img.width}, {"height", img.height}});
    } else if (*pipe_cmd) {
      const Pipeline pipeline = Pipeline::load(pl_config);
      if (pl_check) {
        print_json({{"name", pipeline.name()}, {"stages", pipeline.stage_count()}, {"valid", true}});
        return 0;
      }
      PipelineOptions opt;
      opt.seed = pl_seed;
      if (!pl_out_dir.empty()) opt.output_dir = pl_out_dir;
      const PipelineResult result = pipeline.run(opt);
      const std::string summary = summary_json(result);
      if (!pl_summary.empty()) write_text(pl_summary, summary);
      std::cout << summary;
    }
  } catch (const Error& e) {
    std::cerr << "cellscape: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::config || e.code() == ErrorCode::invalid_parameter ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "cellscape: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
