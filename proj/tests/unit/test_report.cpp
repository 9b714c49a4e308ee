#include "advis/errors.hpp"
#include "advis/report.hpp"

#include <doctest.h>

#include <set>

using namespace advis;

namespace {

std::uint32_t u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

} // namespace

TEST_CASE("indexed BMP layout") {
  // 2 rows x 3 cols
  std::vector<std::int32_t> raster{0, 1, 2, 2, 1, 0};
  auto pal = default_palette(2);
  auto bmp = encode_indexed_bmp(raster, 2, 3, pal);
  CHECK(bmp[0] == 'B');
  CHECK(bmp[1] == 'M');
  CHECK(u32(bmp, 2) == bmp.size());
  const auto offset = u32(bmp, 10);
  CHECK(offset == 14 + 40 + 3 * 4);
  CHECK(u32(bmp, 18) == 3);
  CHECK(u32(bmp, 22) == 2);
  CHECK((bmp[28] | bmp[29] << 8) == 8);
  // palette entry 1 stored BGR
  CHECK(bmp[54 + 4] == pal[1][2]);
  CHECK(bmp[54 + 6] == pal[1][0]);
  // bottom row first, rows padded to 4 bytes
  CHECK(bmp[offset + 0] == 2);
  CHECK(bmp[offset + 2] == 0);
  CHECK(bmp[offset + 3] == 0);
  CHECK(bmp[offset + 4] == 0);
  CHECK(bmp[offset + 6] == 2);
  CHECK(bmp.size() == offset + 8);
  CHECK_THROWS_AS(encode_indexed_bmp({5}, 1, 1, pal), InvalidArgument);
  CHECK_THROWS_AS(encode_indexed_bmp({0, 0}, 1, 1, pal), SizeMismatchError);
}

TEST_CASE("palette entries are distinct") {
  auto pal = default_palette(16);
  CHECK(pal.size() == 17);
  CHECK(pal[0] == Rgb{0, 0, 0});
  std::set<Rgb> unique(pal.begin(), pal.end());
  CHECK(unique.size() == pal.size());
}

TEST_CASE("false color stretch") {
  HsiCube cube{1, 100, 3, {}};
  for (int p = 0; p < 100; ++p)
    for (int b = 0; b < 3; ++b)
      cube.data.push_back(static_cast<float>(p * (b + 1)));
  auto rgb = false_color(cube, {0, 1, 2});
  CHECK(rgb[0][0] == 0);
  CHECK(rgb[99][0] == 255);
  CHECK(rgb[50][1] > 100);
  auto bmp = encode_rgb_bmp(rgb, 1, 100);
  CHECK(bmp.size() == 54 + 300);
  CHECK(default_false_color_bands(204) == std::array<std::size_t, 3>{153, 102, 51});
  CHECK_THROWS_AS(false_color(cube, {0, 1, 3}), InvalidArgument);
}

TEST_CASE("summary CSV") {
  auto csv = format_summary_csv({{10, 2, 0.5, 0.1, 0.25, 0.0}});
  CHECK(csv == "budget,runs,advis_mean,advis_std,dvis_mean,dvis_std\n10,2,0.5,0.10000000000000001,0.25,0\n");
}
