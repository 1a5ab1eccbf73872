#include "cellscape/structures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cellscape/cvt.hpp"
#include "cellscape/random.hpp"

namespace cellscape {

namespace {

std::string describe(Identity id) {
  char hex[8];
  std::snprintf(hex, sizeof hex, "#%06x", static_cast<unsigned>(id));
  return "structure " + std::to_string(id) + " (" + hex + ")";
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::malformed_structure, what); }

bool is_red(const Color& c) { return c.r > 1.5 * std::max(c.g, c.b) && c.r >= 96; }
bool is_blue(const Color& c) { return c.b > 1.5 * std::max(c.r, c.g) && c.b >= 96; }

std::string element_name(const SvgElement& el) { return "<" + el.tag + (el.id.empty() ? "" : " id=\"" + el.id + "\"") + ">"; }

enum class Role { major, minor, axis, input, output };

struct Curve {
  Role role;
  Polyline line;
  std::string name;
};

}  // namespace

SpecDocument build_spec(const SvgDocument& svg) {
  SpecDocument doc{svg.width, svg.height, {}};
  std::vector<Curve> curves;

  for (const SvgElement& el : svg.elements) {
    const SvgStyle& st = el.style;
    const bool filled = st.fill.has_value();
    if (st.dashed && st.stroke) {
      for (const Polyline& line : el.subpaths) curves.push_back({Role::axis, line, element_name(el)});
      continue;
    }
    if (filled && el.subpaths.size() == 1 && el.subpaths.front().closed) {
      const Color c = *st.fill;
      StructureSpec s;
      s.identity = pack_identity(c.r, c.g, c.b);
      s.name = el.id;
      s.boundary = el.subpaths.front();
      s.fill_alpha = st.fill_opacity * st.opacity;
      if (!(s.fill_alpha > 0.0)) malformed(describe(s.identity) + " has zero fill alpha");
      if (s.boundary.points.size() < 3 || std::abs(signed_area(s.boundary.points)) == 0.0)
        malformed(describe(s.identity) + " has a degenerate boundary");
      if (self_intersects(s.boundary.points)) malformed(describe(s.identity) + " boundary intersects itself");
      for (const StructureSpec& other : doc.structures)
        if (other.identity == s.identity)
          throw Error(ErrorCode::conflict, "two boundaries share identity " + describe(s.identity).substr(10));
      doc.structures.push_back(std::move(s));
      continue;
    }
    if (st.stroke && (is_red(*st.stroke) || is_blue(*st.stroke))) {
      const Role role = is_red(*st.stroke) ? Role::input : Role::output;
      for (const Polyline& line : el.subpaths) curves.push_back({role, line, element_name(el)});
      continue;
    }
    if (filled) {
      malformed("boundary " + element_name(el) + " is not a single closed path");
    }
    if (st.stroke) malformed("stroked path " + element_name(el) + " has no fill; boundaries need a fill color");
  }

  if (doc.structures.empty()) throw Error(ErrorCode::malformed_structure, "specification contains no boundary");

  std::vector<std::vector<const Curve*>> axes(doc.structures.size());
  for (const Curve& curve : curves) {
    const Point mid = curve.line.point_at(0.5);
    std::size_t owner = doc.structures.size();
    for (std::size_t s = 0; s < doc.structures.size(); ++s)
      if (point_in_polygon(doc.structures[s].boundary.points, mid)) {
        owner = s;
        break;
      }
    if (owner == doc.structures.size())
      throw Error(ErrorCode::orphan_curve, "curve " + curve.name + " lies inside no structure");
    StructureSpec& s = doc.structures[owner];
    if (curve.role == Role::axis) {
      axes[owner].push_back(&curve);
    } else {
      auto& slot = curve.role == Role::input ? s.input_curve : s.output_curve;
      if (slot) malformed(describe(s.identity) + " has more than one " +
                          (curve.role == Role::input ? "input" : "output") + " curve");
      slot = curve.line;
    }
  }

  for (std::size_t s = 0; s < doc.structures.size(); ++s) {
    StructureSpec& spec = doc.structures[s];
    if (axes[s].size() != 2)
      malformed(describe(spec.identity) + " needs exactly two dashed axes, found " + std::to_string(axes[s].size()));
    const Curve* a = axes[s][0];
    const Curve* b = axes[s][1];
    if (b->line.length() > a->line.length()) std::swap(a, b);
    spec.major_axis = a->line;
    spec.minor_axis = b->line;
    if (spec.minor_axis.length() == 0.0) malformed(describe(spec.identity) + " has a zero-length axis");
  }
  std::sort(doc.structures.begin(), doc.structures.end(),
            [](const StructureSpec& x, const StructureSpec& y) { return x.identity < y.identity; });
  return doc;
}

SpecDocument parse_spec(const std::string& xml, double chord_tolerance) {
  return build_spec(parse_svg(xml, chord_tolerance));
}

SpecDocument read_spec(const std::filesystem::path& path, double chord_tolerance) {
  return build_spec(read_svg(path, chord_tolerance));
}

Polyline shape_boundary(const SvgDocument& svg) {
  for (const SvgElement& e : svg.elements)
    if (e.style.fill && !e.subpaths.empty() && e.subpaths.front().closed && e.subpaths.front().points.size() >= 3)
      return e.subpaths.front();
  throw Error(ErrorCode::malformed_structure, "shape: no closed filled outline");
}

SpecRaster rasterize_spec(const SpecDocument& spec, double scale) {
  if (spec.structures.empty()) throw Error(ErrorCode::invalid_parameter, "no structures to rasterize");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::invalid_parameter, "raster scale must be positive");
  const int w = static_cast<int>(std::ceil(spec.width * scale));
  const int h = static_cast<int>(std::ceil(spec.height * scale));
  if (w < 1 || h < 1) throw Error(ErrorCode::invalid_parameter, "raster would be empty");

  SpecRaster out{DensityMap(w, h), IdentityMap(w, h), scale};
  RowMajorArray<std::int32_t> owner = RowMajorArray<std::int32_t>::Constant(h, w, -1);

  for (std::size_t s = 0; s < spec.structures.size(); ++s) {
    const StructureSpec& st = spec.structures[s];
    const auto& ring = st.boundary.points;
    const Eigen::AlignedBox2d box = st.boundary.bounds();
    const int y0 = std::max(0, static_cast<int>(std::floor(box.min().y() * scale - 0.5)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(box.max().y() * scale)));
    for (int y = y0; y <= y1; ++y) {
      const double yc = (y + 0.5) / scale;
      const std::vector<double> xs = scanline_crossings(ring, yc);
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        // pixel centers xc with xs[k] <= xc < xs[k+1]
        int x = std::max(0, static_cast<int>(std::ceil(xs[k] * scale - 0.5)) - 1);
        while (x < w && (x + 0.5) / scale < xs[k]) ++x;
        for (; x < w && (x + 0.5) / scale < xs[k + 1]; ++x) {
          if (owner(y, x) >= 0)
            throw Error(ErrorCode::overlap, "boundaries overlap: " + describe(spec.structures[owner(y, x)].identity) +
                                                " and " + describe(st.identity));
          owner(y, x) = static_cast<std::int32_t>(s);
          out.density.rho(y, x) = st.fill_alpha;
          out.identity.id(y, x) = st.identity;
        }
      }
    }
  }
  return out;
}

double auto_scale(const SpecDocument& spec, Eigen::Index total, double area_per_cell) {
  if (total < 1) throw Error(ErrorCode::invalid_parameter, "total cell count must be positive");
  double weighted = 0.0;
  for (const StructureSpec& s : spec.structures) weighted += s.fill_alpha * std::abs(signed_area(s.boundary.points));
  double scale = 0.0;
  for (const StructureSpec& s : spec.structures) {
    const double area = std::abs(signed_area(s.boundary.points));
    const double share = double(total) * s.fill_alpha * area / weighted;
    scale = std::max(scale, std::sqrt(area_per_cell * std::max(share, 1.0) / area));
  }
  return scale;
}

std::map<Identity, double> structure_masses(const DensityMap& density, const IdentityMap& identity) {
  if (density.width() != identity.width() || density.height() != identity.height())
    throw Error(ErrorCode::invalid_input, "density and identity maps differ in size");
  std::map<Identity, double> mass;
  for (int y = 0; y < density.height(); ++y)
    for (int x = 0; x < density.width(); ++x)
      if (const double r = density.rho(y, x); r > 0.0) mass[identity.id(y, x)] += r;
  return mass;
}

Allocation allocate_counts(const DensityMap& density, const IdentityMap& identity, Eigen::Index total,
                           const std::vector<Identity>& expected) {
  const std::map<Identity, double> mass = structure_masses(density, identity);
  Allocation out;
  for (Identity id : expected)
    if (!mass.contains(id)) {
      out.counts[id] = 0;
      out.warnings.push_back(describe(id) + " has zero mass and receives no cells");
    }
  if (mass.empty()) throw Error(ErrorCode::degenerate_density, "specification has zero total mass");
  if (total < static_cast<Eigen::Index>(mass.size()))
    throw Error(ErrorCode::invalid_parameter, "total " + std::to_string(total) + " is below the number of structures (" +
                                                  std::to_string(mass.size()) + ")");
  double sum = 0.0;
  for (const auto& [id, m] : mass) sum += m;

  struct Share {
    Identity id;
    Eigen::Index count;
    double remainder;
  };
  std::vector<Share> shares;
  Eigen::Index assigned = 0;
  for (const auto& [id, m] : mass) {
    const double quota = double(total) * m / sum;
    const auto whole = static_cast<Eigen::Index>(std::floor(quota));
    shares.push_back({id, whole, quota - double(whole)});
    assigned += whole;
  }
  std::vector<std::size_t> order(shares.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return shares[a].remainder > shares[b].remainder; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size(), ++assigned) ++shares[order[k]].count;

  // Every structure with mass keeps at least one cell.
  for (Share& s : shares) {
    if (s.count > 0) continue;
    auto donor = std::max_element(shares.begin(), shares.end(),
                                  [](const Share& a, const Share& b) { return a.count < b.count; });
    --donor->count;
    ++s.count;
  }
  for (const Share& s : shares) out.counts[s.id] = s.count;
  return out;
}

Point curvilinear(const Point& p, const StructureSpec& spec) {
  if (spec.major_axis.length() == 0.0 || spec.minor_axis.length() == 0.0)
    malformed(describe(spec.identity) + " has a zero-length axis");
  return {project_onto(spec.major_axis, p).signed_distance, project_onto(spec.minor_axis, p).signed_distance};
}

void tag_roles(Population& population, const SpecDocument& spec, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::invalid_parameter, "role radius must be positive");
  for (Cell& cell : population.cells) {
    cell.input = cell.output = false;
    auto it = std::find_if(spec.structures.begin(), spec.structures.end(),
                           [&](const StructureSpec& s) { return s.identity == cell.structure; });
    if (it == spec.structures.end()) continue;
    if (it->input_curve) cell.input = distance_to(*it->input_curve, cell.position) <= radius;
    if (it->output_curve) cell.output = distance_to(*it->output_curve, cell.position) <= radius;
  }
}

StructureMask structure_mask(const SpecRaster& raster, Identity identity) {
  const auto& rho = raster.density.rho;
  const auto& id = raster.identity.id;
  int x0 = raster.density.width(), y0 = raster.density.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < rho.rows(); ++y)
    for (int x = 0; x < rho.cols(); ++x)
      if (id(y, x) == identity && rho(y, x) > 0.0) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) throw Error(ErrorCode::degenerate_density, describe(identity) + " covers no pixels");
  const int w = x1 - x0 + 1, h = y1 - y0 + 1;
  const auto block_id = id.block(y0, x0, h, w);
  RowMajorArray<double> values = (block_id == identity).select(rho.block(y0, x0, h, w), 0.0);
  return {DensityMap(std::move(values)), x0, y0};
}

Placement place_all(const SpecDocument& spec, Eigen::Index total, const PlacementOptions& options) {
  Placement out;
  out.scale = options.scale > 0.0 ? options.scale : auto_scale(spec, total, options.area_per_cell);
  const SpecRaster raster = rasterize_spec(spec, out.scale);
  std::vector<Identity> ids;
  for (const StructureSpec& s : spec.structures) ids.push_back(s.identity);
  out.allocation = allocate_counts(raster.density, raster.identity, total, ids);
  out.population.width = spec.width;
  out.population.height = spec.height;

  const double scale = out.scale;
  for (const StructureSpec& s : spec.structures) {
    const Eigen::Index count = out.allocation.counts.at(s.identity);
    if (count == 0) continue;
    const StructureMask cropped = structure_mask(raster, s.identity);
    const DensityMap& mask = cropped.density;
    const Point offset(cropped.x0, cropped.y0);
    StippleOptions so;
    so.iterations = options.iterations;
    so.seed = derive_seed({options.seed, s.identity});
    SiteSet sites = stipple(mask, count, so);

    auto valid = [&](const Point& p) {
      const int x = static_cast<int>(std::floor(p.x())), y = static_cast<int>(std::floor(p.y()));
      if (x < 0 || y < 0 || x >= mask.width() || y >= mask.height() || mask.rho(y, x) <= 0.0) return false;
      return point_in_polygon(s.boundary.points, (p + offset) / scale);
    };
    std::optional<LabelMap> labels;
    for (Eigen::Index i = 0; i < sites.size(); ++i) {
      Point p = sites[i];
      if (!valid(p)) {
        // A centroid of a non-convex cell can fall outside the structure:
        // move it to the closest in-structure pixel center of its own cell.
        if (!labels) labels = rasterize_voronoi(sites, mask.width(), mask.height());
        double best = std::numeric_limits<double>::infinity();
        Point target = p;
        for (int y = 0; y < mask.height(); ++y)
          for (int x = 0; x < mask.width(); ++x) {
            if (labels->label(y, x) != i || mask.rho(y, x) <= 0.0) continue;
            const Point c(x + 0.5, y + 0.5);
            if (const double d = (c - p).squaredNorm(); d < best) {
              best = d;
              target = c;
            }
          }
        p = target;
      }
      Cell cell;
      cell.index = out.population.size();
      cell.structure = s.identity;
      cell.position = (p + offset) / scale;
      cell.frame = curvilinear(cell.position, s);
      out.population.cells.push_back(cell);
    }
  }
  if (options.role_radius > 0.0) tag_roles(out.population, spec, options.role_radius);
  return out;
}

}  // namespace cellscape
