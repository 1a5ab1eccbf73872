#pragma once

#include <filesystem>

#include "cellscape/density.hpp"

namespace cellscape {

/// Reads an 8-bit PNG of any color type, expanded to RGBA. 16-bit inputs are
/// rejected.
RasterImage read_png(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RasterImage& image);

/// Headerless RGBA bytes with caller-supplied dimensions.
RasterImage read_raw_rgba(const std::filesystem::path& path, int width, int height);

/// Debug view of a density map as 16-bit grayscale (rho * 65535).
void write_density_png16(const std::filesystem::path& path, const DensityMap& density);

}  // namespace cellscape
