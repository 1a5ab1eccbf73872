#include "cellscape/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cellscape/error.hpp"

namespace cellscape {

namespace {

struct PngImage {
  png_image image;
  PngImage() {
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

[[noreturn]] void fail(const std::filesystem::path& path, const png_image& image) {
  throw Error(ErrorCode::io, path.string() + ": " + image.message);
}

}  // namespace

RasterImage read_png(const std::filesystem::path& path) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) fail(path, png.image);
  if (png.image.format & PNG_FORMAT_FLAG_LINEAR)
    throw Error(ErrorCode::invalid_input, path.string() + ": 16-bit channels are not supported");
  png.image.format = PNG_FORMAT_RGBA;
  RasterImage out(static_cast<int>(png.image.width), static_cast<int>(png.image.height));
  if (!png_image_finish_read(&png.image, nullptr, out.pixels.data(), 0, nullptr)) fail(path, png.image);
  return out;
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
  if (image.width < 1 || image.height < 1) throw Error(ErrorCode::invalid_input, "cannot write an empty image");
  PngImage png;
  png.image.width = static_cast<png_uint_32>(image.width);
  png.image.height = static_cast<png_uint_32>(image.height);
  png.image.format = PNG_FORMAT_RGBA;
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, image.pixels.data(), 0, nullptr)) fail(path, png.image);
}

RasterImage read_raw_rgba(const std::filesystem::path& path, int width, int height) {
  if (width < 1 || height < 1) throw Error(ErrorCode::invalid_input, "raw image needs positive dimensions");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  RasterImage image(width, height);
  const auto bytes = static_cast<std::streamsize>(image.pixels.size() * sizeof(Rgba));
  in.read(reinterpret_cast<char*>(image.pixels.data()), bytes);
  if (in.gcount() != bytes)
    throw Error(ErrorCode::invalid_input, path.string() + ": raw data shorter than width*height*4");
  return image;
}

void write_density_png16(const std::filesystem::path& path, const DensityMap& density) {
  const int w = density.width(), h = density.height();
  if (w < 1 || h < 1) throw Error(ErrorCode::invalid_input, "cannot write an empty density map");
  std::vector<png_uint_16> data(std::size_t(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      data[std::size_t(y) * w + x] =
          static_cast<png_uint_16>(std::lround(std::clamp(density.rho(y, x), 0.0, 1.0) * 65535.0));
  PngImage png;
  png.image.width = static_cast<png_uint_32>(w);
  png.image.height = static_cast<png_uint_32>(h);
  png.image.format = PNG_FORMAT_LINEAR_Y;
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, data.data(), 0, nullptr)) fail(path, png.image);
}

}  // namespace cellscape
