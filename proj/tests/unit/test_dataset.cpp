#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "ledits/dataset.hpp"
#include "ledits/image.hpp"
#include "support/fixtures.hpp"

using namespace ledits;

TEST_CASE("mixture datasets are labelled by component") {
  const auto g = fixtures::three_component();
  const auto d = sample_mixture_dataset(g, 3000, 5);
  CHECK(d.conditions == 3);
  REQUIRE(d.points.size() == 3000);
  std::vector<int> counts(3, 0);
  for (int l : d.labels) ++counts.at(l);
  // Weights 0.2 / 0.5 / 0.3, within 5 standard errors.
  CHECK(std::abs(counts[0] / 3000.0 - 0.2) < 5 * std::sqrt(0.2 * 0.8 / 3000));
  CHECK(std::abs(counts[1] / 3000.0 - 0.5) < 5 * std::sqrt(0.5 * 0.5 / 3000));
  const auto again = sample_mixture_dataset(g, 3000, 5);
  CHECK(again.points == d.points);
  CHECK(again.labels == d.labels);
}

TEST_CASE("procedural shapes") {
  Rng rng(60);
  for (int cls : {0, 1}) {
    for (int i = 0; i < 50; ++i) {
      const Vec img = render_shape(cls, rng);
      REQUIRE(img.size() == 256);
      const auto [lo, hi] = std::minmax_element(img.begin(), img.end());
      CHECK(*lo == -1.0);
      CHECK(*hi >= 0.4);
      CHECK(*hi <= 1.0);
      // A one-pixel dark border is always left.
      for (int k = 0; k < 16; ++k) {
        CHECK(img[k] == -1.0);
        CHECK(img[k * 16] == -1.0);
      }
    }
  }
  // Rectangles fill their bounding box; discs leave its corners dark.
  Rng r2(61);
  for (int cls : {0, 1}) {
    const Vec img = render_shape(cls, r2);
    int x0 = 16, x1 = -1, y0 = 16, y1 = -1, lit = 0;
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        if (img[y * 16 + x] > -1.0) {
          x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
          ++lit;
        }
      }
    }
    const int box = (x1 - x0 + 1) * (y1 - y0 + 1);
    if (cls == 0) CHECK(lit == box);
    else CHECK(lit < box);
  }
  CHECK_THROWS_AS(render_shape(2, rng), ParameterError);

  const auto d = shape_dataset(10, 3);
  CHECK(d.labels == std::vector<int>{0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  CHECK(shape_dataset(10, 3).points == d.points);
  CHECK(shape_dataset(10, 4).points != d.points);
}

TEST_CASE("reference densities") {
  const auto s = fixtures::default_schedule();
  SUBCASE("a mixture reference reports component posteriors") {
    const auto g = fixtures::three_component();
    const auto ref = mixture_reference(g);
    const Vec x = {0.3, 0.1};
    CHECK(ref.class_posterior(x, 7, s) == component_posterior(x, 7, g, s));
  }
  SUBCASE("the kernel reference tells held-out shapes apart") {
    const auto ref = kernel_reference(shape_dataset(1000, 0x5eed), 0.5);
    CHECK(ref.classes == 2);
    const auto test = shape_dataset(100, 99);
    int correct = 0;
    for (std::size_t i = 0; i < test.points.size(); ++i) {
      const Vec p = ref.class_posterior(test.points[i], 1, s);
      CHECK(p[0] + p[1] == doctest::Approx(1.0));
      correct += p[test.labels[i]] > 0.5;
    }
    CHECK(correct >= 80);
  }
  CHECK_THROWS_AS(kernel_reference(LabeledDataset{}, 0.5), ParameterError);
  CHECK_THROWS_AS(kernel_reference(shape_dataset(4, 1), 0.0), ParameterError);
}

TEST_CASE("pixel conversions and quantization") {
  CHECK(to_model_space(Vec{0.0, 0.5, 1.0}) == Vec{-1.0, 0.0, 1.0});
  CHECK(to_pixel_space(Vec{-1.0, 0.0, 1.0}) == Vec{0.0, 0.5, 1.0});
  CHECK(quantize(-0.3) == 0);
  CHECK(quantize(1.7) == 255);
  CHECK(quantize(0.5) == 128);
  CHECK(quantize(1.0 / 255.0) == 1);
}

TEST_CASE("PGM strips round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "ledits_test_pgm";
  std::filesystem::create_directories(dir);
  Rng rng(62);
  std::vector<Vec> tiles;
  for (int k = 0; k < 3; ++k) tiles.push_back(to_pixel_space(render_shape(k % 2, rng)));
  const GrayImage strip = join_tiles(tiles, 16);
  CHECK(strip.width == 48);
  CHECK(strip.height == 16);
  write_pgm(dir / "s.pgm", strip);
  const GrayImage back = read_pgm(dir / "s.pgm");
  CHECK(back.width == 48);
  const auto split = split_tiles(back, 16);
  REQUIRE(split.size() == 3);
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < 256; ++i) CHECK(std::abs(split[k][i] - tiles[k][i]) <= 0.5 / 255.0 + 1e-12);
  }
  // Out-of-range values are clamped only when written.
  write_pgm(dir / "c.pgm", GrayImage{2, 1, {-0.5, 1.5}});
  CHECK(read_pgm(dir / "c.pgm").pixels == Vec{0.0, 1.0});

  std::ofstream(dir / "ascii.pgm") << "P2\n1 1\n255\n0\n";
  CHECK_THROWS_AS(read_pgm(dir / "ascii.pgm"), IoError);
  std::ofstream(dir / "short.pgm", std::ios::binary) << "P5\n# comment\n4 4\n255\nabc";
  CHECK_THROWS_AS(read_pgm(dir / "short.pgm"), IoError);
  CHECK_THROWS_AS(read_pgm(dir / "none.pgm"), IoError);
  CHECK_THROWS_AS(split_tiles(GrayImage{20, 16, Vec(320, 0.0)}, 16), ParameterError);
  std::filesystem::remove_all(dir);
}
