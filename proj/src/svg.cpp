#include "cellscape/svg.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "cellscape/error.hpp"

namespace cellscape {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void bad_svg(const std::string& what) { throw Error(ErrorCode::invalid_input, "svg: " + what); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

/// Reads numbers and single-char flags out of SVG attribute strings, where
/// separators (whitespace, commas) are optional between numbers.
class NumberCursor {
 public:
  explicit NumberCursor(std::string_view s) : s_(s) {}

  void skip_separators() {
    while (pos_ < s_.size() && (std::isspace(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == ',')) ++pos_;
  }
  bool done() {
    skip_separators();
    return pos_ >= s_.size();
  }
  char peek() {
    skip_separators();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  char take() { return s_[pos_++]; }
  bool at_number() {
    const char c = peek();
    return c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c));
  }

  double number() {
    skip_separators();
    std::size_t end = pos_;
    if (end < s_.size() && (s_[end] == '-' || s_[end] == '+')) ++end;
    bool dot = false, digits = false;
    while (end < s_.size()) {
      const char c = s_[end];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits = true;
      } else if (c == '.' && !dot) {
        dot = true;
      } else {
        break;
      }
      ++end;
    }
    if (digits && end < s_.size() && (s_[end] == 'e' || s_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < s_.size() && (s_[e] == '-' || s_[e] == '+')) ++e;
      if (e < s_.size() && std::isdigit(static_cast<unsigned char>(s_[e]))) {
        while (e < s_.size() && std::isdigit(static_cast<unsigned char>(s_[e]))) ++e;
        end = e;
      }
    }
    if (!digits) bad_svg("expected a number at \"" + std::string(s_.substr(pos_, 16)) + "\"");
    std::string token(s_.substr(pos_, end - pos_));
    if (!token.empty() && token.front() == '+') token.erase(0, 1);
    double value = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc()) bad_svg("malformed number \"" + token + "\"");
    pos_ = end;
    return value;
  }

  bool flag() {
    const char c = peek();
    if (c != '0' && c != '1') bad_svg("expected an arc flag");
    ++pos_;
    return c == '1';
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

double parse_length(std::string_view text) {
  text = trim(text);
  std::size_t end = text.size();
  while (end > 0 && std::isalpha(static_cast<unsigned char>(text[end - 1]))) --end;
  if (text.substr(end) != "" && text.substr(end) != "px") bad_svg("unsupported length unit in \"" + std::string(text) + "\"");
  NumberCursor c(text.substr(0, end));
  return c.number();
}

// Path building: segments in local coordinates, transformed as control
// points, flattened last.
struct Segment {
  bool cubic;
  Point p0, p1, p2, p3;  // for lines only p0, p3
};

struct Subpath {
  std::vector<Segment> segments;
  Point start;
  bool closed = false;
};

void flatten_cubic(const Point& p0, const Point& p1, const Point& p2, const Point& p3, double tol, int depth,
                   std::vector<Point>& out) {
  const Point chord = p3 - p0;
  const double len = chord.norm();
  auto deviation = [&](const Point& q) {
    if (len == 0.0) return (q - p0).norm();
    return std::abs(chord.x() * (q - p0).y() - chord.y() * (q - p0).x()) / len;
  };
  if (depth >= 18 || std::max(deviation(p1), deviation(p2)) <= tol) {
    out.push_back(p3);
    return;
  }
  const Point p01 = 0.5 * (p0 + p1), p12 = 0.5 * (p1 + p2), p23 = 0.5 * (p2 + p3);
  const Point p012 = 0.5 * (p01 + p12), p123 = 0.5 * (p12 + p23);
  const Point mid = 0.5 * (p012 + p123);
  flatten_cubic(p0, p01, p012, mid, tol, depth + 1, out);
  flatten_cubic(mid, p123, p23, p3, tol, depth + 1, out);
}

void append_arc(Subpath& sp, const Point& from, double rx, double ry, double phi_deg, bool large, bool sweep,
                const Point& to) {
  if (from == to) return;
  rx = std::abs(rx);
  ry = std::abs(ry);
  if (rx == 0.0 || ry == 0.0) {
    sp.segments.push_back({false, from, from, to, to});
    return;
  }
  const double phi = phi_deg * M_PI / 180.0;
  const double c = std::cos(phi), s = std::sin(phi);
  const Point d = 0.5 * (from - to);
  const Point p(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
  const double lambda = (p.x() * p.x()) / (rx * rx) + (p.y() * p.y()) / (ry * ry);
  if (lambda > 1.0) {
    rx *= std::sqrt(lambda);
    ry *= std::sqrt(lambda);
  }
  const double num = rx * rx * ry * ry - rx * rx * p.y() * p.y() - ry * ry * p.x() * p.x();
  const double den = rx * rx * p.y() * p.y() + ry * ry * p.x() * p.x();
  double coef = std::sqrt(std::max(0.0, num / den));
  if (large == sweep) coef = -coef;
  const Point cp(coef * rx * p.y() / ry, -coef * ry * p.x() / rx);
  const Point center(c * cp.x() - s * cp.y() + 0.5 * (from.x() + to.x()),
                     s * cp.x() + c * cp.y() + 0.5 * (from.y() + to.y()));
  auto angle = [](const Point& u, const Point& v) {
    return std::atan2(u.x() * v.y() - u.y() * v.x(), u.dot(v));
  };
  const Point u((p.x() - cp.x()) / rx, (p.y() - cp.y()) / ry);
  const Point v((-p.x() - cp.x()) / rx, (-p.y() - cp.y()) / ry);
  const double theta = angle(Point(1, 0), u);
  double delta = angle(u, v);
  if (!sweep && delta > 0) delta -= 2 * M_PI;
  if (sweep && delta < 0) delta += 2 * M_PI;

  const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(delta) / (M_PI / 2) - 1e-9)));
  const double step = delta / pieces;
  const double k = 4.0 / 3.0 * std::tan(step / 4);
  auto on_ellipse = [&](double t) {
    return Point(center.x() + rx * c * std::cos(t) - ry * s * std::sin(t),
                 center.y() + rx * s * std::cos(t) + ry * c * std::sin(t));
  };
  auto tangent = [&](double t) {
    return Point(-rx * c * std::sin(t) - ry * s * std::cos(t), -rx * s * std::sin(t) + ry * c * std::cos(t));
  };
  Point a = from;
  for (int i = 0; i < pieces; ++i) {
    const double t0 = theta + i * step, t1 = t0 + step;
    const Point b = (i + 1 == pieces) ? to : on_ellipse(t1);
    sp.segments.push_back({true, a, a + k * tangent(t0), b - k * tangent(t1), b});
    a = b;
  }
}

std::vector<Subpath> build_path(std::string_view data) {
  std::vector<Subpath> paths;
  NumberCursor cur(data);
  Point pos = Point::Zero(), start = Point::Zero();
  Point last_ctrl = Point::Zero();
  char last_cmd = 0;
  char cmd = 0;
  auto current = [&]() -> Subpath& {
    if (paths.empty() || paths.back().closed) {
      paths.push_back({{}, pos, false});
      start = pos;
    }
    return paths.back();
  };
  while (!cur.done()) {
    if (std::isalpha(static_cast<unsigned char>(cur.peek()))) {
      cmd = cur.take();
    } else if (cmd == 0) {
      bad_svg("path data must start with a command");
    }
    const bool rel = std::islower(static_cast<unsigned char>(cmd));
    const Point base = rel ? pos : Point::Zero();
    auto read_point = [&]() -> Point {
      const double x = cur.number();
      const double y = cur.number();
      return Point(x, y) + base;
    };
    switch (std::toupper(static_cast<unsigned char>(cmd))) {
      case 'M': {
        pos = read_point();
        paths.push_back({{}, pos, false});
        start = pos;
        cmd = rel ? 'l' : 'L';  // further pairs are implicit lineto
        last_cmd = 'M';
        continue;
      }
      case 'Z': {
        if (!paths.empty()) {
          Subpath& sp = paths.back();
          if (pos != sp.start) sp.segments.push_back({false, pos, pos, sp.start, sp.start});
          sp.closed = true;
          pos = sp.start;
        }
        cmd = 0;
        last_cmd = 'Z';
        continue;
      }
      case 'L': {
        const Point p = read_point();
        current().segments.push_back({false, pos, pos, p, p});
        pos = p;
        break;
      }
      case 'H': {
        const Point p(cur.number() + base.x(), pos.y());
        current().segments.push_back({false, pos, pos, p, p});
        pos = p;
        break;
      }
      case 'V': {
        const Point p(pos.x(), cur.number() + base.y());
        current().segments.push_back({false, pos, pos, p, p});
        pos = p;
        break;
      }
      case 'C': {
        const Point c1 = read_point(), c2 = read_point(), p = read_point();
        current().segments.push_back({true, pos, c1, c2, p});
        last_ctrl = c2;
        pos = p;
        break;
      }
      case 'S': {
        const bool chain = last_cmd == 'C' || last_cmd == 'S';
        const Point c1 = chain ? Point(2 * pos - last_ctrl) : pos;
        const Point c2 = read_point(), p = read_point();
        current().segments.push_back({true, pos, c1, c2, p});
        last_ctrl = c2;
        pos = p;
        break;
      }
      case 'Q': {
        const Point q = read_point(), p = read_point();
        current().segments.push_back({true, pos, pos + 2.0 / 3.0 * (q - pos), p + 2.0 / 3.0 * (q - p), p});
        last_ctrl = q;
        pos = p;
        break;
      }
      case 'T': {
        const bool chain = last_cmd == 'Q' || last_cmd == 'T';
        const Point q = chain ? Point(2 * pos - last_ctrl) : pos;
        const Point p = read_point();
        current().segments.push_back({true, pos, pos + 2.0 / 3.0 * (q - pos), p + 2.0 / 3.0 * (q - p), p});
        last_ctrl = q;
        pos = p;
        break;
      }
      case 'A': {
        const double rx = cur.number(), ry = cur.number(), phi = cur.number();
        const bool large = cur.flag(), sweep = cur.flag();
        const Point p = read_point();
        append_arc(current(), pos, rx, ry, phi, large, sweep, p);
        pos = p;
        break;
      }
      default:
        bad_svg(std::string("unsupported path command '") + cmd + "'");
    }
    last_cmd = static_cast<char>(std::toupper(static_cast<unsigned char>(cmd)));
  }
  return paths;
}

std::vector<Polyline> flatten(const std::vector<Subpath>& paths, double tol, const Eigen::Affine2d& t) {
  std::vector<Polyline> out;
  for (const Subpath& sp : paths) {
    Polyline line{{t * sp.start}, sp.closed};
    for (const Segment& s : sp.segments) {
      if (s.cubic)
        flatten_cubic(t * s.p0, t * s.p1, t * s.p2, t * s.p3, tol, 0, line.points);
      else
        line.points.push_back(t * s.p3);
    }
    // Drop consecutive duplicates and the repeated closing point.
    line.points.erase(std::unique(line.points.begin(), line.points.end()), line.points.end());
    if (line.closed && line.points.size() > 1 && line.points.front() == line.points.back()) line.points.pop_back();
    if (line.points.size() >= 2) out.push_back(std::move(line));
  }
  return out;
}

// Styles

using AttributeMap = std::map<std::string, std::string, std::less<>>;

AttributeMap attributes_of(const pt::ptree& node) {
  AttributeMap attrs;
  if (auto a = node.get_child_optional("<xmlattr>"))
    for (const auto& [key, value] : *a) attrs[key] = value.data();
  if (auto it = attrs.find("style"); it != attrs.end()) {
    std::stringstream style(it->second);
    std::string decl;
    while (std::getline(style, decl, ';')) {
      const std::string_view d(decl);
      if (const auto colon = d.find(':'); colon != std::string_view::npos)
        attrs[std::string(trim(d.substr(0, colon)))] = std::string(trim(d.substr(colon + 1)));
    }
  }
  return attrs;
}

double parse_opacity(std::string_view text) {
  NumberCursor c(text);
  double v = c.number();
  if (!c.done() && c.peek() == '%') v /= 100.0;
  return std::clamp(v, 0.0, 1.0);
}

SvgStyle apply_style(SvgStyle style, const AttributeMap& attrs, bool group) {
  if (auto it = attrs.find("fill"); it != attrs.end()) style.fill = parse_color(it->second);
  if (auto it = attrs.find("stroke"); it != attrs.end()) style.stroke = parse_color(it->second);
  if (auto it = attrs.find("fill-opacity"); it != attrs.end()) style.fill_opacity = parse_opacity(it->second);
  if (auto it = attrs.find("opacity"); it != attrs.end()) style.opacity *= parse_opacity(it->second);
  if (auto it = attrs.find("stroke-dasharray"); it != attrs.end()) {
    const std::string value = lower(trim(it->second));
    bool any = false;
    if (value != "none" && !value.empty()) {
      NumberCursor c(value);
      while (!c.done()) {
        if (!c.at_number()) break;
        if (c.number() > 0) any = true;
      }
    }
    style.dashed = any;
  }
  (void)group;
  return style;
}

std::vector<Point> ellipse_points(double cx, double cy, double rx, double ry, double tol, const Eigen::Affine2d& t) {
  const double scale = std::max(rx, ry) * std::max(t.linear().cwiseAbs().maxCoeff(), 1e-12);
  const double step = scale > tol ? 2.0 * std::acos(1.0 - tol / scale) : M_PI / 2;
  const int n = std::max(8, static_cast<int>(std::ceil(2 * M_PI / step)));
  std::vector<Point> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double a = 2 * M_PI * i / n;
    pts.push_back(t * Point(cx + rx * std::cos(a), cy + ry * std::sin(a)));
  }
  return pts;
}

double attr_number(const AttributeMap& attrs, const char* key, double fallback = 0.0) {
  auto it = attrs.find(key);
  return it == attrs.end() ? fallback : parse_length(it->second);
}

std::vector<Point> point_list(std::string_view text, const Eigen::Affine2d& t) {
  std::vector<Point> pts;
  NumberCursor c(text);
  while (!c.done()) {
    const double x = c.number();
    const double y = c.number();
    pts.push_back(t * Point(x, y));
  }
  return pts;
}

std::string_view local_name(std::string_view tag) {
  if (const auto colon = tag.find(':'); colon != std::string_view::npos) {
    if (tag.substr(0, colon) != "svg") return {};
    return tag.substr(colon + 1);
  }
  return tag;
}

void walk(const pt::ptree& node, const SvgStyle& inherited, const Eigen::Affine2d& transform, double tol,
          SvgDocument& doc) {
  for (const auto& [raw_tag, child] : node) {
    const std::string_view tag = local_name(raw_tag);
    if (tag.empty() || tag.front() == '<') continue;
    if (tag == "defs" || tag == "metadata" || tag == "title" || tag == "desc" || tag == "style") continue;

    const AttributeMap attrs = attributes_of(child);
    Eigen::Affine2d t = transform;
    if (auto it = attrs.find("transform"); it != attrs.end()) t = transform * parse_transform(it->second);
    const SvgStyle style = apply_style(inherited, attrs, tag == "g");

    if (tag == "g" || tag == "svg") {
      walk(child, style, t, tol, doc);
      continue;
    }

    SvgElement el{std::string(tag), {}, {}, style};
    if (auto it = attrs.find("id"); it != attrs.end()) el.id = it->second;
    if (tag == "path") {
      auto it = attrs.find("d");
      if (it == attrs.end()) continue;
      el.subpaths = flatten(build_path(it->second), tol, t);
    } else if (tag == "rect") {
      const double x = attr_number(attrs, "x"), y = attr_number(attrs, "y");
      const double w = attr_number(attrs, "width"), h = attr_number(attrs, "height");
      el.subpaths.push_back({{t * Point(x, y), t * Point(x + w, y), t * Point(x + w, y + h), t * Point(x, y + h)}, true});
    } else if (tag == "circle") {
      const double r = attr_number(attrs, "r");
      el.subpaths.push_back({ellipse_points(attr_number(attrs, "cx"), attr_number(attrs, "cy"), r, r, tol, t), true});
    } else if (tag == "ellipse") {
      el.subpaths.push_back({ellipse_points(attr_number(attrs, "cx"), attr_number(attrs, "cy"),
                                            attr_number(attrs, "rx"), attr_number(attrs, "ry"), tol, t),
                             true});
    } else if (tag == "line") {
      el.subpaths.push_back({{t * Point(attr_number(attrs, "x1"), attr_number(attrs, "y1")),
                              t * Point(attr_number(attrs, "x2"), attr_number(attrs, "y2"))},
                             false});
    } else if (tag == "polyline" || tag == "polygon") {
      auto it = attrs.find("points");
      if (it == attrs.end()) continue;
      el.subpaths.push_back({point_list(it->second, t), tag == "polygon"});
    } else {
      continue;  // text, images and other content carry no geometry here
    }
    if (!el.subpaths.empty()) doc.elements.push_back(std::move(el));
  }
}

}  // namespace

std::optional<Color> parse_color(std::string_view text) {
  const std::string s = lower(trim(text));
  if (s == "none" || s == "transparent") return std::nullopt;
  if (!s.empty() && s[0] == '#') {
    auto hex = [&](std::size_t i, std::size_t n) {
      unsigned v = 0;
      const auto res = std::from_chars(s.data() + i, s.data() + i + n, v, 16);
      if (res.ec != std::errc() || res.ptr != s.data() + i + n) bad_svg("bad color \"" + s + "\"");
      return v;
    };
    if (s.size() == 4)
      return Color{std::uint8_t(hex(1, 1) * 17), std::uint8_t(hex(2, 1) * 17), std::uint8_t(hex(3, 1) * 17)};
    if (s.size() == 7) return Color{std::uint8_t(hex(1, 2)), std::uint8_t(hex(3, 2)), std::uint8_t(hex(5, 2))};
    bad_svg("bad color \"" + s + "\"");
  }
  if (s.rfind("rgb(", 0) == 0 && s.back() == ')') {
    std::string_view body(s);
    body = body.substr(4, body.size() - 5);
    std::uint8_t channel[3];
    for (int i = 0; i < 3; ++i) {
      const auto comma = body.find(',');
      std::string_view part = trim(body.substr(0, comma));
      double v;
      if (!part.empty() && part.back() == '%') {
        NumberCursor c(part.substr(0, part.size() - 1));
        v = c.number() / 100.0 * 255.0;
      } else {
        NumberCursor c(part);
        v = c.number();
      }
      channel[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      if (i < 2) {
        if (comma == std::string_view::npos) bad_svg("bad color \"" + s + "\"");
        body.remove_prefix(comma + 1);
      }
    }
    return Color{channel[0], channel[1], channel[2]};
  }
  static const std::map<std::string, Color, std::less<>> named{
      {"black", {0, 0, 0}},       {"white", {255, 255, 255}}, {"red", {255, 0, 0}},    {"lime", {0, 255, 0}},
      {"green", {0, 128, 0}},     {"blue", {0, 0, 255}},      {"yellow", {255, 255, 0}}, {"gray", {128, 128, 128}},
      {"grey", {128, 128, 128}},  {"orange", {255, 165, 0}},  {"purple", {128, 0, 128}}, {"cyan", {0, 255, 255}},
      {"magenta", {255, 0, 255}},
  };
  if (auto it = named.find(s); it != named.end()) return it->second;
  bad_svg("unsupported color \"" + s + "\"");
}

Eigen::Affine2d parse_transform(std::string_view text) {
  Eigen::Affine2d t = Eigen::Affine2d::Identity();
  text = trim(text);
  while (!text.empty()) {
    const auto open = text.find('(');
    const auto close = text.find(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
      bad_svg("malformed transform \"" + std::string(text) + "\"");
    const std::string name(trim(text.substr(0, open)));
    NumberCursor args(text.substr(open + 1, close - open - 1));
    std::vector<double> v;
    while (!args.done()) v.push_back(args.number());
    if (name == "translate" && (v.size() == 1 || v.size() == 2)) {
      t = t * Eigen::Translation2d(v[0], v.size() == 2 ? v[1] : 0.0);
    } else if (name == "scale" && (v.size() == 1 || v.size() == 2)) {
      t = t * Eigen::Scaling(v[0], v.size() == 2 ? v[1] : v[0]);
    } else {
      bad_svg("unsupported transform \"" + name + "\" (only translate and scale)");
    }
    text = trim(text.substr(close + 1));
    if (!text.empty() && text.front() == ',') text = trim(text.substr(1));
  }
  return t;
}

std::vector<Polyline> parse_path_data(std::string_view data, double chord_tolerance, const Eigen::Affine2d& transform) {
  return flatten(build_path(data), chord_tolerance, transform);
}

SvgDocument parse_svg(const std::string& xml, double chord_tolerance) {
  if (!(chord_tolerance > 0.0)) throw Error(ErrorCode::invalid_parameter, "chord tolerance must be positive");
  pt::ptree tree;
  try {
    std::istringstream in(xml);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    bad_svg(e.what());
  }
  const pt::ptree* root = nullptr;
  for (const auto& [tag, child] : tree)
    if (local_name(tag) == "svg") root = &child;
  if (!root) bad_svg("no <svg> root element");

  SvgDocument doc;
  const AttributeMap attrs = attributes_of(*root);
  Eigen::Affine2d base = Eigen::Affine2d::Identity();
  if (auto it = attrs.find("viewBox"); it != attrs.end()) {
    NumberCursor c(it->second);
    const double x = c.number(), y = c.number(), w = c.number(), h = c.number();
    if (!(w > 0 && h > 0)) bad_svg("viewBox needs positive size");
    doc.width = w;
    doc.height = h;
    base = Eigen::Translation2d(-x, -y);
  } else {
    doc.width = attr_number(attrs, "width");
    doc.height = attr_number(attrs, "height");
  }
  if (auto it = attrs.find("transform"); it != attrs.end()) base = base * parse_transform(it->second);
  const SvgStyle root_style = apply_style(SvgStyle{}, attrs, true);
  walk(*root, root_style, base, chord_tolerance, doc);

  if (!(doc.width > 0 && doc.height > 0)) {
    Eigen::AlignedBox2d box;
    for (const auto& el : doc.elements)
      for (const auto& line : el.subpaths) box.extend(line.bounds());
    if (box.isEmpty()) bad_svg("document has no size and no geometry");
    doc.width = box.max().x();
    doc.height = box.max().y();
  }
  return doc;
}

SvgDocument read_svg(const std::filesystem::path& path, double chord_tolerance) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_svg(buffer.str(), chord_tolerance);
}

}  // namespace cellscape
