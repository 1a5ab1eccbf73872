#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cellscape/conformal.hpp"
#include "cellscape/connect.hpp"
#include "cellscape/field.hpp"
#include "cellscape/population.hpp"
#include "cellscape/render.hpp"

namespace cellscape {

/// Version written to, and required from, every artifact.
inline constexpr int kFormatVersion = 1;

/// Sites in raster pixel units plus the factor that maps the source image onto that raster.
struct SiteTable {
  int width = 0;
  int height = 0;
  double scale_x = 1.0;
  double scale_y = 1.0;
  Eigen::Matrix2Xd positions;
  std::vector<Identity> identity;

  friend bool operator==(const SiteTable&, const SiteTable&) = default;
};

struct ActivityRecord {
  Eigen::VectorXd mean_activity;
  Eigen::VectorXd final_u;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  double t = 0.0;
};

struct GridRecord {
  GridFamily family = GridFamily::polar;
  std::vector<GridLine> lines;
};

std::string read_text(const std::filesystem::path& path);
/// Writes atomically enough for the CLI: truncate then write, throwing io on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

// Every dump_* produces compact JSON with a trailing newline and a
// {"format": 1, "kind": ...} header; parse_* reject other kinds or versions.

std::string dump_sites(const SiteTable& sites);
SiteTable parse_sites(const std::string& json);

std::string dump_population(const Population& pop);
Population parse_population(const std::string& json);

std::string dump_graph(const ConnectivityGraph& graph);
ConnectivityGraph parse_graph(const std::string& json);

std::string dump_activity(const ActivityRecord& activity);
ActivityRecord parse_activity(const std::string& json);

std::string dump_grid(const GridRecord& grid);
GridRecord parse_grid(const std::string& json);

/// {"format":1,"kind":"colormap","name":...,"stops":[[t,"#rrggbb"],...]}
std::string dump_colormap(const Colormap& colormap);
Colormap parse_colormap(const std::string& json);

/// Flat TOML document mirroring FieldParams. Unknown keys are config errors.
FieldParams parse_field_params(const std::string& toml);
FieldParams read_field_params(const std::filesystem::path& path);
std::string dump_field_params(const FieldParams& params);

/// Wraps a site table as a population over its raster (identity from the table).
Population population_from_table(const SiteTable& sites);

}  // namespace cellscape
