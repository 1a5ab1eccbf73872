#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellscape/geometry.hpp"

namespace cellscape {

struct Color {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Color&, const Color&) = default;
};

/// "none" yields nullopt; #rgb, #rrggbb, rgb(...) with integers or
/// percentages, and the basic named colors are accepted.
std::optional<Color> parse_color(std::string_view text);

struct SvgStyle {
  std::optional<Color> fill = Color{};  // SVG default fill is black
  std::optional<Color> stroke;
  bool dashed = false;
  double fill_opacity = 1.0;
  double opacity = 1.0;
};

struct SvgElement {
  std::string tag;
  std::string id;
  std::vector<Polyline> subpaths;  // flattened, in document coordinates
  SvgStyle style;
};

struct SvgDocument {
  double width = 0.0;
  double height = 0.0;
  std::vector<SvgElement> elements;  // document order
};

/// Subset reader: path, rect, circle, ellipse, line, polyline and polygon
/// inside nested groups; translate/scale transforms; presentation
/// attributes and inline style. Bezier and arc segments are flattened so
/// that no chord deviates more than chord_tolerance from the curve.
SvgDocument parse_svg(const std::string& xml, double chord_tolerance = 0.25);
SvgDocument read_svg(const std::filesystem::path& path, double chord_tolerance = 0.25);

/// Path-data mini language ("M 0 0 C ..."), flattened after applying transform.
std::vector<Polyline> parse_path_data(std::string_view data, double chord_tolerance,
                                      const Eigen::Affine2d& transform = Eigen::Affine2d::Identity());

Eigen::Affine2d parse_transform(std::string_view text);

}  // namespace cellscape
