#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cellscape/density.hpp"
#include "cellscape/formats.hpp"

namespace cellscape {

/// Density raster plus its identity map; `holes` lists discs carved into it.
struct DensityArtifact {
  DensityMap density;
  IdentityMap identity;
  double scale_x = 1.0;
  double scale_y = 1.0;
  std::vector<Eigen::Vector2d> hole_centers;
  std::vector<double> hole_radii;
};

/// Named scalar results of an analysis stage.
using Report = std::map<std::string, double>;

using Artifact =
    std::variant<DensityArtifact, SiteTable, Population, ConnectivityGraph, ActivityRecord, RasterImage, GridRecord, Report>;

/// density, sites, population, graph, activity, image, grid or report.
std::string artifact_type(const Artifact& artifact);

struct StageResult {
  std::string name;
  std::string kind;
  std::string type;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  std::map<std::string, double> metrics;
  std::vector<std::string> files;
  Warnings warnings;
};

struct PipelineResult {
  std::string name;
  std::vector<StageResult> stages;
  std::map<std::string, Artifact> artifacts;

  template <typename T>
  const T& get(const std::string& artifact) const {
    return std::get<T>(artifacts.at(artifact));
  }
};

struct PipelineOptions {
  /// Replaces the config's top-level seed.
  std::optional<std::uint64_t> seed;
  /// Directory receiving every stage's `out` file; defaults to the config's output_dir.
  std::optional<std::filesystem::path> output_dir;
  /// Skip writing files (artifacts still kept in memory).
  bool write_files = true;
};

/// A parsed, type-checked configuration ready to run.
struct PipelineConfig;

class Pipeline {
 public:
  /// Parses TOML text; relative input paths resolve against base_dir. Throws
  /// config with the offending stage for unknown kinds, missing keys, dangling
  /// references or artifact type mismatches.
  static Pipeline parse(const std::string& toml, const std::filesystem::path& base_dir = ".");
  static Pipeline load(const std::filesystem::path& path);

  Pipeline(Pipeline&&) noexcept;
  Pipeline& operator=(Pipeline&&) noexcept;
  ~Pipeline();

  const std::string& name() const;
  std::size_t stage_count() const;

  /// Runs every stage in order. A failing stage rethrows its Error with the
  /// stage name prefixed to the message.
  PipelineResult run(const PipelineOptions& options = {}) const;

 private:
  explicit Pipeline(std::unique_ptr<PipelineConfig> config);
  std::unique_ptr<PipelineConfig> config_;
};

/// Machine-readable run summary: per stage kind, type, metrics, files and timing.
std::string summary_json(const PipelineResult& result);

}  // namespace cellscape
