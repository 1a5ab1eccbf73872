#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "cellscape/density.hpp"
#include "cellscape/error.hpp"
#include "cellscape/image_io.hpp"
#include "cellscape/random.hpp"

using namespace cellscape;

namespace {

RasterImage single_pixel(Rgba p) {
  RasterImage img(1, 1);
  img.at(0, 0) = p;
  return img;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected cellscape::Error");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("decode maps alpha to density and RGB to identity") {
  auto white = decode(single_pixel({255, 255, 255, 255}));
  CHECK(white.density.rho(0, 0) == 1.0);
  CHECK(white.identity.id(0, 0) == 16777215u);

  auto clear = decode(single_pixel({12, 34, 56, 0}));
  CHECK(clear.density.rho(0, 0) == 0.0);

  auto red = decode(single_pixel({255, 0, 0, 128}));
  CHECK(red.identity.id(0, 0) == 16711680u);
  CHECK(red.density.rho(0, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-15));

  CHECK(code_of([] { decode(RasterImage{}); }) == ErrorCode::invalid_input);
}

TEST_CASE("encode then decode reproduces 255-level densities") {
  Rng rng(7);
  DensityMap d(17, 9);
  IdentityMap id(17, 9);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 17; ++x) {
      d.rho(y, x) = double(rng.below(256)) / 255.0;
      id.id(y, x) = static_cast<Identity>(rng.below(1u << 24));
    }
  const auto back = decode(encode(d, id));
  CHECK((back.density.rho == d.rho).all());
  CHECK((back.identity.id == id.id).all());
}

TEST_CASE("threshold clamps then renormalizes") {
  DensityMap d(3, 1);
  d.rho << 0.8, 0.3, 0.5;
  CHECK((apply_threshold(d, 1.0).rho == d.rho).all());
  const auto t = apply_threshold(d, 0.5);
  CHECK(t.rho(0, 0) == doctest::Approx(1.0));
  CHECK(t.rho(0, 1) == doctest::Approx(0.6));
  CHECK(t.rho(0, 2) == doctest::Approx(1.0));
  CHECK(code_of([&] { apply_threshold(d, 0.0); }) == ErrorCode::invalid_parameter);
  CHECK(code_of([&] { apply_threshold(d, -0.1); }) == ErrorCode::invalid_parameter);
}

TEST_CASE("threshold composes multiplicatively and is idempotent at t = 1") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    DensityMap d(8, 8);
    for (int k = 0; k < d.rho.size(); ++k) d.rho.data()[k] = rng.uniform();
    const double t1 = rng.uniform(0.05, 1.0), t2 = rng.uniform(0.05, 1.0);
    const auto chained = apply_threshold(apply_threshold(d, t1), t2);
    const auto direct = apply_threshold(d, t1 * t2);
    CHECK((chained.rho - direct.rho).abs().maxCoeff() < 1e-12);
    const auto once = apply_threshold(d, 1.0);
    CHECK((apply_threshold(once, 1.0).rho == once.rho).all());
    CHECK((once.rho <= 1.0).all());
  }
}

TEST_CASE("resize guarantees the per-cell pixel budget") {
  DensityMap d(37, 23, 1.0);
  IdentityMap id(37, 23, 5);
  const auto r = resize_for_population(d, id, 1000);
  CHECK(double(r.density.width()) * r.density.height() >= 500.0 * 1000);

  DensityMap big(1000, 1000, 0.5);
  IdentityMap big_id(1000, 1000, 1);
  const auto same = resize_for_population(big, big_id, 20);
  CHECK(same.density.width() == 1000);
  CHECK(same.density.height() == 1000);
  CHECK(same.scale_x == 1.0);
  CHECK((same.density.rho == big.rho).all());
}

TEST_CASE("resize 100x100 for 1000 cells is the smallest square above budget and never interpolates") {
  Rng rng(3);
  DensityMap d(100, 100);
  IdentityMap id(100, 100);
  std::set<std::pair<double, Identity>> before;
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x) {
      d.rho(y, x) = double(rng.below(256)) / 255.0 + 1e-3;
      id.id(y, x) = static_cast<Identity>(rng.below(4));
      before.insert({d.rho(y, x), id.id(y, x)});
    }
  const auto r = resize_for_population(d, id, 1000);
  // 707^2 < 500000 <= 708^2
  CHECK(r.density.width() == 708);
  CHECK(r.density.height() == 708);
  std::set<std::pair<double, Identity>> after;
  for (int y = 0; y < 708; ++y)
    for (int x = 0; x < 708; ++x) after.insert({r.density.rho(y, x), r.identity.id(y, x)});
  // Upscaling hits every source pixel, so the value set is preserved exactly.
  CHECK(after == before);
}

TEST_CASE("carve_holes") {
  DensityMap d(100, 100, 1.0);
  std::vector<Eigen::Vector2d> none;
  std::vector<double> no_radii;
  CHECK((carve_holes(d, none, no_radii).rho == d.rho).all());

  std::vector<Eigen::Vector2d> center{{50.0, 50.0}};
  std::vector<double> huge{200.0};
  CHECK(code_of([&] { carve_holes(d, center, huge); }) == ErrorCode::degenerate_density);

  std::vector<double> ten{10.0};
  const auto carved = carve_holes(d, center, ten);
  long zeroed = 0, expected = 0;
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x) {
      if (carved.rho(y, x) == 0.0) ++zeroed;
      const double dx = x + 0.5 - 50.0, dy = y + 0.5 - 50.0;
      if (dx * dx + dy * dy <= 100.0) ++expected;
    }
  CHECK(zeroed == expected);
  CHECK(std::abs(zeroed - M_PI * 100.0) < 2 * M_PI * 10.0);

  std::vector<double> bad{-1.0};
  CHECK(code_of([&] { carve_holes(d, center, bad); }) == ErrorCode::invalid_parameter);
}

TEST_CASE("carve_holes is monotone") {
  Rng rng(5);
  DensityMap d(40, 30);
  for (int k = 0; k < d.rho.size(); ++k) d.rho.data()[k] = rng.uniform(0.1, 1.0);
  std::vector<Eigen::Vector2d> c;
  std::vector<double> r;
  for (int i = 0; i < 6; ++i) {
    c.emplace_back(rng.uniform(0, 40), rng.uniform(0, 30));
    r.push_back(rng.uniform(0, 6));
  }
  const auto out = carve_holes(d, c, r);
  CHECK((out.rho <= d.rho).all());
}

TEST_CASE("png round trip and 16-bit debug output") {
  const auto dir = std::filesystem::temp_directory_path() / "cellscape_density_test";
  std::filesystem::create_directories(dir);
  RasterImage img(5, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x)
      img.at(x, y) = Rgba{std::uint8_t(x * 40), std::uint8_t(y * 80), 7, std::uint8_t(x * 50 + y)};
  write_png(dir / "rt.png", img);
  const auto back = read_png(dir / "rt.png");
  CHECK(back.width == 5);
  CHECK(back.height == 3);
  CHECK(back.pixels == img.pixels);

  write_density_png16(dir / "d16.png", decode(img).density);
  CHECK(code_of([&] { read_png(dir / "d16.png"); }) == ErrorCode::invalid_input);
  CHECK(code_of([&] { read_png(dir / "missing.png"); }) == ErrorCode::io);
}
