#include <doctest.h>

#include <filesystem>

#include "cellscape/parallel.hpp"
#include "cellscape/pipeline.hpp"
#include "support.hpp"

using namespace cellscape;
using support::catch_error;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cellscape_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kSmall = R"(
format = 1
name = "small"
seed = 11

[[stage]]
kind = "linear_gradient"
name = "g"
width = 120
height = 90

[[stage]]
kind = "stipple"
name = "sites"
from = "g"
cells = 60
iterations = 10
out = "sites.json"

[[stage]]
kind = "connect"
name = "graph"
from = "sites"
k = 4
out = "graph.json"

[[stage]]
kind = "simulate"
name = "act"
from = "sites"
steps = 30
out = "act.json"
[stage.params]
tau = 0.1
dt = 0.01
A_e = 200.0
sigma_e = 0.05
A_i = 50.0
sigma_i = 0.15
kernel_units = "domain"
rate_fn = "sigmoid"
slope = 10.0
offset = 0.5

[[stage]]
kind = "render"
name = "img"
from = "sites"
values = "act"
style = "voronoi"
out = "img.png"

[[stage]]
kind = "render"
name = "hist"
from = "sites"
values = "act"
style = "histogram"
bins = 8
upsample = 4
out = "hist.png"
)";

std::map<std::string, std::string> outputs(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = read_text(e.path());
  return files;
}

}  // namespace

TEST_CASE("empty pipeline succeeds without artifacts") {
  const fs::path dir = scratch("empty");
  const Pipeline p = Pipeline::parse("format = 1\n");
  CHECK(p.stage_count() == 0);
  PipelineOptions opt;
  opt.output_dir = dir;
  const PipelineResult r = p.run(opt);
  CHECK(r.stages.empty());
  CHECK(r.artifacts.empty());
  CHECK(fs::is_empty(dir));
  CHECK(summary_json(r).find("\"stages\": []") != std::string::npos);
}

TEST_CASE("configuration is type-checked before running") {
  auto err = [](const std::string& body) { return catch_error([&] { Pipeline::parse("format = 1\n" + body); }); };
  CHECK(catch_error([] { Pipeline::parse("name = \"x\"\n"); }).code == ErrorCode::config);
  CHECK(catch_error([] { Pipeline::parse("format = 1\nbogus = 2\n"); }).code == ErrorCode::config);
  CHECK(catch_error([] { Pipeline::parse("format = 1\n[[stage\n"); }).code == ErrorCode::config);

  const auto unknown = err("[[stage]]\nkind = \"teleport\"\nname = \"jump\"\n");
  CHECK(unknown.code == ErrorCode::config);
  CHECK(unknown.message.find("jump") != std::string::npos);

  const auto dangling = err("[[stage]]\nkind = \"stipple\"\nname = \"s\"\nfrom = \"nothing\"\ncells = 3\n");
  CHECK(dangling.code == ErrorCode::config);
  CHECK(dangling.message.find("'s'") != std::string::npos);
  CHECK(dangling.message.find("nothing") != std::string::npos);

  const auto mismatch = err(
      "[[stage]]\nkind = \"grid_population\"\nname = \"pop\"\nside = 3\n"
      "[[stage]]\nkind = \"stipple\"\nname = \"s\"\nfrom = \"pop\"\ncells = 3\n");
  CHECK(mismatch.code == ErrorCode::config);
  CHECK(mismatch.message.find("needs a density") != std::string::npos);

  const auto typo = err("[[stage]]\nkind = \"linear_gradient\"\nwidht = 3\nheight = 3\n");
  CHECK(typo.message.find("widht") != std::string::npos);

  // References may only point backwards.
  CHECK(err("[[stage]]\nkind = \"population\"\nfrom = \"later\"\n"
            "[[stage]]\nkind = \"linear_gradient\"\nname = \"later\"\nwidth = 2\nheight = 2\n")
            .code == ErrorCode::config);
}

TEST_CASE("a failing stage is named") {
  const Pipeline p = Pipeline::parse(
      "format = 1\n[[stage]]\nkind = \"linear_gradient\"\nname = \"g\"\nwidth = 10\nheight = 10\n"
      "[[stage]]\nkind = \"threshold\"\nname = \"cut\"\nfrom = \"g\"\nt = 0.0\n");
  const auto failed = catch_error([&] { p.run({std::nullopt, std::nullopt, false}); });
  CHECK(failed.code == ErrorCode::invalid_parameter);
  CHECK(failed.message.find("stage 'cut'") != std::string::npos);

  const Pipeline missing = Pipeline::parse("format = 1\n[[stage]]\nkind = \"linear_gradient\"\nname = \"g\"\nwidth = 10\n");
  const auto m = catch_error([&] { missing.run({std::nullopt, std::nullopt, false}); });
  CHECK(m.code == ErrorCode::config);
  CHECK(m.message.find("height is required") != std::string::npos);
}

TEST_CASE("pipeline artifacts and byte-identical reruns") {
  const Pipeline p = Pipeline::parse(kSmall);
  const fs::path a = scratch("run_a"), b = scratch("run_b"), c = scratch("run_c");
  set_thread_count(1);
  const PipelineResult ra = p.run({std::nullopt, a, true});
  set_thread_count(4);
  p.run({std::nullopt, b, true});
  set_thread_count(0);

  CHECK(ra.stages.size() == 6);
  CHECK(ra.get<SiteTable>("sites").positions.cols() == 60);
  CHECK(ra.get<ConnectivityGraph>("graph").edges.size() == 240);
  CHECK(ra.get<ActivityRecord>("act").mean_activity.size() == 60);
  CHECK(ra.get<RasterImage>("img").width == 120);
  CHECK(ra.get<RasterImage>("hist").width == 29);
  CHECK(artifact_type(ra.artifacts.at("graph")) == "graph");

  const auto fa = outputs(a), fb = outputs(b);
  CHECK(fa.size() == 5);
  CHECK(fa == fb);

  // A different seed changes the stochastic artifacts.
  p.run({99, c, true});
  const auto fc = outputs(c);
  CHECK(fc.at("sites.json") != fa.at("sites.json"));

  // Written artifacts parse back to the in-memory ones.
  CHECK(parse_sites(fa.at("sites.json")) == ra.get<SiteTable>("sites"));
  CHECK(parse_activity(fa.at("act.json")).mean_activity == ra.get<ActivityRecord>("act").mean_activity);
}

TEST_CASE("shipped configurations validate") {
  for (const char* name : {"gradient.toml", "connectivity.toml", "retina.toml", "neural_field.toml",
                           "basal_ganglia.toml", "map.toml"}) {
    CAPTURE(name);
    CHECK_NOTHROW(Pipeline::load(support::data_path(name)));
  }
}

TEST_CASE("map stage produces a pulled-back grid") {
  const std::string cfg = "format = 1\n[[stage]]\nkind = \"map\"\nname = \"m\"\nshape = \"shapes/blob.svg\"\nlines = 4\n"
                          "samples = 16\nnodes = 128\n";
  const PipelineResult r = Pipeline::parse(cfg, CELLSCAPE_DATA_DIR).run({std::nullopt, std::nullopt, false});
  const GridRecord& g = r.get<GridRecord>("m");
  CHECK(g.lines.size() == 8);
  CHECK(r.stages[0].metrics.at("reciprocal_condition") > 1e-3);
}
