#include "cellscape/formats.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "cellscape/error.hpp"
#include "cellscape/svg.hpp"

namespace cellscape {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::invalid_input, what); }

json header(const char* kind) { return json{{"format", kFormatVersion}, {"kind", kind}}; }

std::string finish(const json& j) { return j.dump() + "\n"; }

json parse_document(const std::string& text, const char* kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string(kind) + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) bad(std::string(kind) + ": expected a JSON object");
  if (!j.contains("format") || !j["format"].is_number_integer() || j["format"].get<int>() != kFormatVersion)
    throw Error(ErrorCode::config, std::string(kind) + ": unsupported or missing format version");
  if (!j.contains("kind") || j["kind"] != kind)
    bad(std::string(kind) + ": document kind is " + (j.contains("kind") ? j["kind"].dump() : "missing"));
  return j;
}

// Field access that turns nlohmann type errors into invalid_input with the offending key.
template <typename T>
T field(const json& j, const char* key, const char* kind) {
  if (!j.contains(key)) bad(std::string(kind) + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string(kind) + ": \"" + key + "\" has the wrong type");
  }
}

json points_json(const std::vector<Complex>& pts) {
  json a = json::array();
  for (const Complex& z : pts) a.push_back({z.real(), z.imag()});
  return a;
}

std::vector<Complex> points_from(const json& a) {
  std::vector<Complex> out;
  for (const auto& p : a) out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return out;
}

std::string hex(const Eigen::Vector3d& rgb) {
  char buf[8];
  auto q = [](double c) { return static_cast<int>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); };
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", q(rgb[0]), q(rgb[1]), q(rgb[2]));
  return buf;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

std::string dump_sites(const SiteTable& s) {
  json j = header("sites");
  j["width"] = s.width;
  j["height"] = s.height;
  j["scale"] = {s.scale_x, s.scale_y};
  json rows = json::array();
  for (Eigen::Index i = 0; i < s.positions.cols(); ++i)
    rows.push_back({{"index", i},
                    {"x", s.positions(0, i)},
                    {"y", s.positions(1, i)},
                    {"identity", i < Eigen::Index(s.identity.size()) ? s.identity[i] : 0u}});
  j["sites"] = std::move(rows);
  return finish(j);
}

SiteTable parse_sites(const std::string& text) {
  const json j = parse_document(text, "sites");
  SiteTable s;
  s.width = field<int>(j, "width", "sites");
  s.height = field<int>(j, "height", "sites");
  const auto scale = field<std::vector<double>>(j, "scale", "sites");
  if (scale.size() != 2) bad("sites: \"scale\" must hold two numbers");
  s.scale_x = scale[0];
  s.scale_y = scale[1];
  const json& rows = j.at("sites");
  s.positions.resize(2, static_cast<Eigen::Index>(rows.size()));
  s.identity.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (field<std::size_t>(rows[i], "index", "sites") != i) bad("sites: indices must be 0..n-1 in order");
    s.positions(0, i) = field<double>(rows[i], "x", "sites");
    s.positions(1, i) = field<double>(rows[i], "y", "sites");
    s.identity[i] = field<Identity>(rows[i], "identity", "sites");
  }
  return s;
}

std::string dump_population(const Population& pop) {
  json j = header("population");
  j["width"] = pop.width;
  j["height"] = pop.height;
  json rows = json::array();
  for (const Cell& c : pop.cells)
    rows.push_back({{"index", c.index},
                    {"structure", c.structure},
                    {"x", c.position.x()},
                    {"y", c.position.y()},
                    {"u", c.frame.x()},
                    {"v", c.frame.y()},
                    {"input", c.input},
                    {"output", c.output}});
  j["cells"] = std::move(rows);
  return finish(j);
}

Population parse_population(const std::string& text) {
  const json j = parse_document(text, "population");
  Population pop;
  pop.width = field<double>(j, "width", "population");
  pop.height = field<double>(j, "height", "population");
  const json& rows = j.at("cells");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& r = rows[i];
    Cell c;
    c.index = field<Eigen::Index>(r, "index", "population");
    if (c.index != static_cast<Eigen::Index>(i)) bad("population: indices must be 0..n-1 in order");
    c.structure = r.value("structure", Identity{0});
    c.position = Point(field<double>(r, "x", "population"), field<double>(r, "y", "population"));
    c.frame = Point(r.value("u", 0.0), r.value("v", 0.0));
    c.input = r.value("input", false);
    c.output = r.value("output", false);
    pop.cells.push_back(c);
  }
  return pop;
}

std::string dump_graph(const ConnectivityGraph& g) {
  json j = header("graph");
  j["n"] = g.n;
  json edges = json::array();
  for (const Edge& e : g.edges) edges.push_back({e.source, e.target, e.length});
  j["edges"] = std::move(edges);
  return finish(j);
}

ConnectivityGraph parse_graph(const std::string& text) {
  const json j = parse_document(text, "graph");
  ConnectivityGraph g;
  g.n = field<Eigen::Index>(j, "n", "graph");
  for (const json& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3) bad("graph: each edge is [source, target, length]");
    Edge edge{e[0].get<Eigen::Index>(), e[1].get<Eigen::Index>(), e[2].get<double>()};
    if (edge.source < 0 || edge.source >= g.n || edge.target < 0 || edge.target >= g.n)
      bad("graph: edge endpoint out of range");
    g.edges.push_back(edge);
  }
  return g;
}

std::string dump_activity(const ActivityRecord& a) {
  json j = header("activity");
  j["steps"] = a.steps;
  j["seed"] = a.seed;
  j["t"] = a.t;
  j["values"] = std::vector<double>(a.mean_activity.begin(), a.mean_activity.end());
  j["final"] = std::vector<double>(a.final_u.begin(), a.final_u.end());
  return finish(j);
}

ActivityRecord parse_activity(const std::string& text) {
  const json j = parse_document(text, "activity");
  ActivityRecord a;
  a.steps = j.value("steps", std::uint64_t{0});
  a.seed = j.value("seed", std::uint64_t{0});
  a.t = j.value("t", 0.0);
  const auto values = field<std::vector<double>>(j, "values", "activity");
  a.mean_activity = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  const auto fin = j.value("final", std::vector<double>{});
  a.final_u = Eigen::Map<const Eigen::VectorXd>(fin.data(), static_cast<Eigen::Index>(fin.size()));
  return a;
}

std::string dump_grid(const GridRecord& g) {
  json j = header("grid");
  j["family"] = g.family == GridFamily::polar ? "polar" : "cartesian";
  json lines = json::array();
  for (const GridLine& l : g.lines)
    lines.push_back(
        {{"kind", l.kind}, {"level", l.level}, {"disc", points_json(l.disc)}, {"region", points_json(l.region)}});
  j["lines"] = std::move(lines);
  return finish(j);
}

GridRecord parse_grid(const std::string& text) {
  const json j = parse_document(text, "grid");
  GridRecord g;
  const auto family = field<std::string>(j, "family", "grid");
  if (family != "polar" && family != "cartesian") bad("grid: unknown family " + family);
  g.family = family == "polar" ? GridFamily::polar : GridFamily::cartesian;
  for (const json& l : j.at("lines"))
    g.lines.push_back({field<std::string>(l, "kind", "grid"), field<double>(l, "level", "grid"),
                       points_from(l.at("disc")), points_from(l.at("region"))});
  return g;
}

std::string dump_colormap(const Colormap& cm) {
  json j = header("colormap");
  j["name"] = cm.name;
  json stops = json::array();
  for (const auto& s : cm.stops) stops.push_back({s.t, hex(s.rgb)});
  j["stops"] = std::move(stops);
  return finish(j);
}

Colormap parse_colormap(const std::string& text) {
  const json j = parse_document(text, "colormap");
  Colormap cm;
  cm.name = j.value("name", std::string("custom"));
  for (const json& s : j.at("stops")) {
    if (!s.is_array() || s.size() != 2) bad("colormap: each stop is [t, color]");
    const auto c = parse_color(s[1].get<std::string>());
    if (!c) bad("colormap: stop color is none");
    cm.stops.push_back({s[0].get<double>(), Eigen::Vector3d(c->r, c->g, c->b) / 255.0});
  }
  cm.validate();
  return cm;
}

FieldParams parse_field_params(const std::string& text) {
  toml::table t;
  try {
    t = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::config, std::string("field params: ") + std::string(e.description()));
  }
  static const std::set<std::string> known{"format",  "tau",     "dt",         "h",           "A_e",
                                           "sigma_e", "A_i",     "sigma_i",    "kernel_units", "input_mean",
                                           "input_noise", "rate_fn", "slope",   "offset",      "weight_scale"};
  for (const auto& [key, value] : t)
    if (!known.count(std::string(key.str())))
      throw Error(ErrorCode::config, "field params: unknown key " + std::string(key.str()));
  if (const auto f = t["format"].value<int64_t>(); f && *f != kFormatVersion)
    throw Error(ErrorCode::config, "field params: unsupported format " + std::to_string(*f));

  FieldParams p;
  auto real = [&](const char* key, double& out) {
    if (!t.contains(key)) return;
    const auto v = t[key].value<double>();
    if (!v) throw Error(ErrorCode::config, std::string("field params: ") + key + " must be a number");
    out = *v;
  };
  real("tau", p.tau);
  real("dt", p.dt);
  real("h", p.h);
  real("A_e", p.dog.excitatory_amplitude);
  real("sigma_e", p.dog.excitatory_width);
  real("A_i", p.dog.inhibitory_amplitude);
  real("sigma_i", p.dog.inhibitory_width);
  real("input_mean", p.input_mean);
  real("input_noise", p.input_noise);
  real("slope", p.slope);
  real("offset", p.offset);
  if (t.contains("kernel_units")) {
    const auto u = t["kernel_units"].value<std::string>();
    if (u == "absolute")
      p.units = KernelUnits::absolute;
    else if (u == "domain")
      p.units = KernelUnits::domain;
    else
      throw Error(ErrorCode::config, "field params: kernel_units must be \"absolute\" or \"domain\"");
  }
  if (t.contains("rate_fn")) {
    const auto r = t["rate_fn"].value<std::string>();
    if (r == "rectify")
      p.rate = RateFunction::rectify;
    else if (r == "sigmoid")
      p.rate = RateFunction::sigmoid;
    else if (r == "identity")
      p.rate = RateFunction::identity;
    else
      throw Error(ErrorCode::config, "field params: rate_fn must be rectify, sigmoid or identity");
  }
  if (t.contains("weight_scale")) {
    const auto b = t["weight_scale"].value<bool>();
    if (!b) throw Error(ErrorCode::config, "field params: weight_scale must be a boolean");
    p.weight_scale = *b;
  }
  validate(p);
  return p;
}

FieldParams read_field_params(const std::filesystem::path& path) { return parse_field_params(read_text(path)); }

std::string dump_field_params(const FieldParams& p) {
  toml::table t{{"format", kFormatVersion},
                {"tau", p.tau},
                {"dt", p.dt},
                {"h", p.h},
                {"A_e", p.dog.excitatory_amplitude},
                {"sigma_e", p.dog.excitatory_width},
                {"A_i", p.dog.inhibitory_amplitude},
                {"sigma_i", p.dog.inhibitory_width},
                {"kernel_units", p.units == KernelUnits::domain ? "domain" : "absolute"},
                {"input_mean", p.input_mean},
                {"input_noise", p.input_noise},
                {"rate_fn", p.rate == RateFunction::sigmoid    ? "sigmoid"
                            : p.rate == RateFunction::identity ? "identity"
                                                               : "rectify"},
                {"slope", p.slope},
                {"offset", p.offset},
                {"weight_scale", p.weight_scale}};
  std::ostringstream ss;
  ss << t << "\n";
  return ss.str();
}

Population population_from_table(const SiteTable& sites) {
  Population pop{static_cast<double>(sites.width), static_cast<double>(sites.height), {}};
  for (Eigen::Index i = 0; i < sites.positions.cols(); ++i) {
    Cell c;
    c.index = i;
    c.position = sites.positions.col(i);
    c.structure = i < Eigen::Index(sites.identity.size()) ? sites.identity[i] : 0;
    pop.cells.push_back(c);
  }
  return pop;
}

}  // namespace cellscape
