#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cellscape/density.hpp"
#include "cellscape/error.hpp"
#include "cellscape/geometry.hpp"
#include "cellscape/population.hpp"
#include "cellscape/svg.hpp"

namespace cellscape {

struct StructureSpec {
  Identity identity = 0;
  std::string name;
  Polyline boundary;  // closed
  Polyline major_axis;
  Polyline minor_axis;
  std::optional<Polyline> input_curve;
  std::optional<Polyline> output_curve;
  double fill_alpha = 1.0;
};

struct SpecDocument {
  double width = 0.0;
  double height = 0.0;
  std::vector<StructureSpec> structures;  // ascending identity
};

/// Classifies SVG elements by style. Dashed strokes are axes (the longer of
/// the two is major), closed filled shapes are boundaries whose fill RGB is
/// the identity and whose fill opacity times opacity is the density, red
/// strokes are input curves and blue strokes output curves.
SpecDocument build_spec(const SvgDocument& svg);
SpecDocument parse_spec(const std::string& xml, double chord_tolerance = 0.25);
SpecDocument read_spec(const std::filesystem::path& path, double chord_tolerance = 0.25);

/// First closed, filled outline of an SVG document (a lone boundary with no
/// axes or role curves). Throws malformed_structure when there is none.
Polyline shape_boundary(const SvgDocument& svg);

struct SpecRaster {
  DensityMap density;
  IdentityMap identity;
  double scale = 1.0;  // pixels per document unit
};

/// Pixel (x, y) samples the document at ((x + 0.5) / scale, (y + 0.5) / scale).
SpecRaster rasterize_spec(const SpecDocument& spec, double scale);

/// Pixels per document unit giving every structure at least area_per_cell
/// pixels per cell when total cells are shared by boundary area.
double auto_scale(const SpecDocument& spec, Eigen::Index total, double area_per_cell = 500.0);

/// Sum of rho by identity over pixels with rho > 0.
std::map<Identity, double> structure_masses(const DensityMap& density, const IdentityMap& identity);

struct Allocation {
  std::map<Identity, Eigen::Index> counts;
  Warnings warnings;
};

/// Largest-remainder apportionment of total by mass. Structures listed in
/// expected but absent from the map get zero cells and a warning.
Allocation allocate_counts(const DensityMap& density, const IdentityMap& identity, Eigen::Index total,
                           const std::vector<Identity>& expected = {});

/// (u, v) = signed distances to the major and minor axis.
Point curvilinear(const Point& p, const StructureSpec& spec);

void tag_roles(Population& population, const SpecDocument& spec, double radius);

struct PlacementOptions {
  int iterations = 50;
  std::uint64_t seed = 0;
  double role_radius = 0.0;  // <= 0 leaves roles untagged
  double scale = 0.0;        // <= 0 selects auto_scale
  double area_per_cell = 500.0;
};

struct Placement {
  Population population;
  Allocation allocation;
  double scale = 1.0;
};

/// Per-structure stippling of its own cropped mask with sub-seed
/// derive_seed({seed, identity}); positions reported in document units,
/// ordered by (identity, per-structure index).
Placement place_all(const SpecDocument& spec, Eigen::Index total, const PlacementOptions& options = {});

/// A structure's density cropped to the bounding box of its pixels, with
/// every other identity masked to zero. Pixel (x, y) of the crop is pixel
/// (x + x0, y + y0) of the raster.
struct StructureMask {
  DensityMap density;
  int x0 = 0;
  int y0 = 0;
};

StructureMask structure_mask(const SpecRaster& raster, Identity identity);

}  // namespace cellscape
