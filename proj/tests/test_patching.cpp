#include <doctest.h>

#include <random>
#include <vector>

#include "mlsom/patching.hpp"

using namespace mlsom;

namespace {

ByteImageView view_of(const std::vector<std::uint8_t>& bytes, Index h, Index w, Index c) {
  return {h, w, c, std::span<const std::uint8_t>(bytes)};
}

std::vector<std::uint8_t> random_bytes(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> b(0, 255);
  std::vector<std::uint8_t> out(n);
  for (auto& v : out) v = static_cast<std::uint8_t>(b(rng));
  return out;
}

}  // namespace

TEST_CASE("normalize_image endpoint and closed-form values") {
  const std::vector<std::uint8_t> bytes = {0, 255, 128, 51};
  const Image<float> img = normalize_image<float>(view_of(bytes, 2, 2, 1));
  CHECK(img.pixels[0] == 0.0f);
  CHECK(img.pixels[1] == 1.0f);
  CHECK(img.pixels[2] == doctest::Approx(0.5019607843137255).epsilon(1e-6));
  CHECK(img.pixels[3] == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(img.height == 2);
  CHECK(img.width == 2);

  const std::vector<std::uint8_t> zeros(12, 0);
  const Image<double> z = normalize_image<double>(view_of(zeros, 2, 2, 3));
  CHECK((z.pixels.array() == 0.0).all());
}

TEST_CASE("extract_patches preset geometries") {
  std::mt19937_64 rng(1);
  SUBCASE("28x28 grayscale, window 14 stride 7 -> 9 patches of length 196") {
    const auto bytes = random_bytes(28 * 28, rng);
    const auto img = normalize_image<float>(view_of(bytes, 28, 28, 1));
    const auto ps = extract_patches(img, PatchConfig{14, 7, 1});
    CHECK(ps.count() == 9);
    CHECK(ps.patches.cols() == 196);
    CHECK(ps.origins.front() == GridCoord{0, 0});
    CHECK(ps.origins.back() == GridCoord{14, 14});
  }
  SUBCASE("32x32 RGB, window 16 stride 4 -> 25 patches of length 768") {
    const auto bytes = random_bytes(32 * 32 * 3, rng);
    const auto img = normalize_image<float>(view_of(bytes, 32, 32, 3));
    const auto ps = extract_patches(img, PatchConfig{16, 4, 3});
    CHECK(ps.count() == 25);
    CHECK(ps.patches.cols() == 768);
  }
}

TEST_CASE("window == image side degenerates to one whole-image patch") {
  std::mt19937_64 rng(2);
  const auto bytes = random_bytes(12 * 12, rng);
  const auto img = normalize_image<float>(view_of(bytes, 12, 12, 1));
  const auto ps = extract_patches(img, PatchConfig{12, 12, 1});
  REQUIRE(ps.count() == 1);
  CHECK((ps.patches.row(0).transpose().array() == img.pixels.array()).all());
}

TEST_CASE("patch values equal the source image values element-wise") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::uniform_int_distribution<Index> ch_d(0, 1);
    const Index channels = ch_d(rng) == 0 ? 1 : 3;
    const Index h = 20, w = 20;
    const auto bytes = random_bytes(static_cast<std::size_t>(h * w * channels), rng);
    const auto img = normalize_image<double>(view_of(bytes, h, w, channels));
    const PatchConfig cfg{8, 4, channels};
    const auto ps = extract_patches(img, cfg);
    REQUIRE(ps.count() == 16);
    for (Index p = 0; p < ps.count(); ++p) {
      const GridCoord o = ps.origins[static_cast<std::size_t>(p)];
      for (Index r = 0; r < cfg.window; ++r)
        for (Index c = 0; c < cfg.window; ++c)
          for (Index k = 0; k < channels; ++k)
            CHECK(ps.patches(p, (r * cfg.window + c) * channels + k) ==
                  img(o.row + r, o.col + c, k));
    }
  }
}

TEST_CASE("patch count formula and full coverage for stride <= window") {
  std::mt19937_64 rng(4);
  int checked = 0;
  while (checked < 200) {
    std::uniform_int_distribution<Index> w_d(1, 12), s_d(1, 12), steps_d(1, 4);
    const Index window = w_d(rng);
    const Index stride = s_d(rng);
    const Index steps = steps_d(rng);
    const Index side = window + (steps - 1) * stride;
    if (side > 40) continue;
    ++checked;
    const auto bytes = random_bytes(static_cast<std::size_t>(side * side), rng);
    const auto img = normalize_image<float>(view_of(bytes, side, side, 1));
    const PatchConfig cfg{window, stride, 1};
    const auto ps = extract_patches(img, cfg);
    const Index per_side = (side - window) / stride + 1;
    CHECK(ps.count() == per_side * per_side);

    if (stride <= window) {
      std::vector<char> covered(static_cast<std::size_t>(side * side), 0);
      for (const GridCoord& o : ps.origins)
        for (Index r = 0; r < window; ++r)
          for (Index c = 0; c < window; ++c)
            covered[static_cast<std::size_t>((o.row + r) * side + o.col + c)] = 1;
      bool all = true;
      for (const char v : covered) all = all && v;
      CHECK(all);
    }
  }
}

TEST_CASE("incompatible geometry is rejected with a stride message") {
  std::mt19937_64 rng(5);
  const auto bytes = random_bytes(28 * 28, rng);
  const auto img = normalize_image<float>(view_of(bytes, 28, 28, 1));
  CHECK_THROWS_WITH_AS(extract_patches(img, PatchConfig{14, 5, 1}),
                       doctest::Contains("stride incompatibility"), ConfigError);
  CHECK_THROWS_AS(extract_patches(img, PatchConfig{29, 7, 1}), ConfigError);
  CHECK_THROWS_AS(extract_patches(img, PatchConfig{0, 7, 1}), ConfigError);
}
