#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "generators.hpp"

using namespace hypso;

namespace {

const std::string kFixtures = HYPSO_FIXTURES;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::io_error;
}

// rows x cols DEM with elevation = f(row, col).
template <class F>
Dem make_dem(int rows, int cols, F f, double cellsize = 10.0) {
  Dem d{rows, cols, cellsize, -9999.0, {}};
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) d.elevations.push_back(f(r, c));
  return d;
}

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST(LoadDem, AsciiGridExact) {
  const auto d = parse_asc("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 30\nNODATA_value -9999\n1 2\n3 -9999\n");
  EXPECT_EQ(d.rows, 2);
  EXPECT_EQ(d.cols, 2);
  EXPECT_EQ(d.cellsize, 30.0);
  EXPECT_EQ(d.elevations, (std::vector<double>{1, 2, 3, -9999}));
  EXPECT_FALSE(d.valid(3));
  EXPECT_EQ(d.valid_count(), 3u);
}

TEST(LoadDem, HeightmapEndpointsExact) {
  const Gray16 g{3, 1, {0, 32768, 65535}};
  const auto d = decode_png_dem(encode_gray16(g), R"({"min_elev": -100, "max_elev": 900, "cellsize": 5})");
  EXPECT_EQ(d.elevations[0], -100.0);
  EXPECT_EQ(d.elevations[2], 900.0);
  EXPECT_NEAR(d.elevations[1], -100.0 + 1000.0 * 32768 / 65535, 1e-9);
  EXPECT_EQ(d.cellsize, 5.0);

  const auto with_nodata = decode_png_dem(encode_gray16(g), R"({"min_elev": 0, "max_elev": 1, "nodata": 0})");
  EXPECT_FALSE(with_nodata.valid(0));
  EXPECT_TRUE(with_nodata.valid(1));
}

TEST(LoadDem, ErrorPaths) {
  EXPECT_EQ(code_of([] { parse_asc("ncols 3\nnrows 2\ncellsize 1\n1 2 3 4 5\n"); }), Errc::dimension_mismatch);
  EXPECT_EQ(code_of([] { parse_asc("ncols 2\ncellsize 1\n1 2\n"); }), Errc::malformed_header);
  EXPECT_EQ(code_of([] { parse_asc("ncols 2\nnrows 1\ncellsize 1\nbogus 4\n1 2\n"); }), Errc::malformed_header);
  EXPECT_EQ(code_of([] { parse_asc("ncols 2\nnrows 1\ncellsize 1\nnodata_value -1\n-1 -1\n"); }), Errc::all_nodata);
  EXPECT_EQ(code_of([] { decode_png_dem(encode_gray16(Gray16{1, 1, {7}}), "{}"); }), Errc::malformed_header);
  EXPECT_EQ(code_of([] { load_dem(kFixtures + "/sunset.jpg"); }), Errc::unsupported_format);
  EXPECT_EQ(code_of([] { load_dem(kFixtures + "/missing.asc"); }), Errc::file_not_found);
}

TEST(LoadDem, BundledFixturesLoad) {
  for (const char* name : {"ridge.asc", "crater.asc", "canyon.asc", "mountain.png"}) {
    const auto d = load_dem(kFixtures + "/" + name);
    EXPECT_GT(d.valid_count(), 0u) << name;
    EXPECT_LE(d.rows, 512) << name;
    EXPECT_LE(d.cols, 512) << name;
  }
}

TEST(ClassifyZones, EqualIntervalsOnARamp) {
  const auto d = make_dem(1, 101, [](int, int c) { return static_cast<double>(c); });
  const auto zm = classify_zones(d, 4);
  EXPECT_EQ(zm.boundaries, (std::vector<double>{0, 25, 50, 75, 100}));
  EXPECT_EQ(zm.zone[0], 0);
  EXPECT_EQ(zm.zone[24], 0);
  EXPECT_EQ(zm.zone[25], 1);
  EXPECT_EQ(zm.zone[75], 3);
  EXPECT_EQ(zm.zone[100], 3);  // top interval closed
}

TEST(ClassifyZones, ConstantDemIsZoneZero) {
  const auto zm = classify_zones(make_dem(3, 3, [](int, int) { return 42.0; }), 5);
  for (int z : zm.zone) EXPECT_EQ(z, 0);
  const auto q = classify_zones(make_dem(3, 3, [](int, int) { return 42.0; }), 5, ZoneMethod::quantile);
  for (int z : q.zone) EXPECT_EQ(z, 0);
  EXPECT_FALSE(q.notices.empty());
}

TEST(ClassifyZones, NodataExcluded) {
  auto d = make_dem(2, 2, [](int r, int c) { return r * 2.0 + c; });
  d.elevations[1] = -9999.0;
  const auto zm = classify_zones(d, 2);
  EXPECT_EQ(zm.zone[1], -1);
  const auto areas = zone_areas(zm);
  EXPECT_NEAR(sum(areas.proportions), 1.0, 1e-12);
}

TEST(ClassifyZones, QuantilesBalanceCounts) {
  // Skewed elevations: equal intervals would crowd zone 0.
  const auto d = make_dem(1, 100, [](int, int c) { return std::pow(c / 99.0, 4) * 1000; });
  const auto areas = zone_areas(classify_zones(d, 4, ZoneMethod::quantile));
  for (double a : areas.proportions) EXPECT_NEAR(a, 0.25, 0.02);
}

TEST(ClassifyZones, InvariantsOnRandomDems) {
  gen::Engine e(91);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = gen::dem(e, gen::integer(e, 1, 30), gen::integer(e, 1, 30), gen::real(e, 0, 0.5));
    const int n = gen::integer(e, 2, 12);
    const auto method = gen::coin(e) ? ZoneMethod::quantile : ZoneMethod::equal_interval;
    const auto zm = classify_zones(d, n, method);
    for (std::size_t i = 0; i + 1 < zm.boundaries.size(); ++i) EXPECT_LT(zm.boundaries[i], zm.boundaries[i + 1]);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!d.valid(i)) {
        EXPECT_EQ(zm.zone[i], -1);
        continue;
      }
      const int z = zm.zone[i];
      ASSERT_GE(z, 0);
      ASSERT_LT(z, zm.n);
      EXPECT_GE(d.elevations[i], zm.boundaries[z]);
      if (z + 1 < zm.n) EXPECT_LT(d.elevations[i], zm.boundaries[z + 1]);
      else EXPECT_LE(d.elevations[i], zm.boundaries[z + 1]);
    }
  }
}

TEST(ZoneAreas, QuartersOnAFourZoneRamp) {
  const auto d = make_dem(1, 8, [](int, int c) { return c * 10.0; });
  const auto areas = zone_areas(classify_zones(d, 4));
  EXPECT_EQ(areas.proportions, (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
}

TEST(ZoneAreas, ConservationOnFuzzedDems) {
  gen::Engine e(92);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = gen::dem(e, gen::integer(e, 1, 40), gen::integer(e, 1, 40), gen::real(e, 0, 0.7));
    EXPECT_NEAR(sum(zone_areas(classify_zones(d, gen::integer(e, 2, 12))).proportions), 1.0, 1e-9);
    EXPECT_NEAR(sum(elevation_slivers(d, gen::integer(e, 2, 80)).proportions), 1.0, 1e-9);
    const auto s = gen::scheme(e, gen::integer(e, 2, 9), TintMode::continuous);
    double mass = 0;
    for (const auto& m : ramp_mass(d, s, gen::integer(e, 9, 80))) mass += m.mass;
    EXPECT_NEAR(mass, 1.0, 1e-9);
  }
}

TEST(Hillshade, FlatDemIsSinAltitude) {
  const auto flat = make_dem(16, 16, [](int, int) { return 250.0; });
  for (double alt : {10.0, 30.0, 45.0, 60.0, 90.0}) {
    const auto hs = hillshade(flat, default_azimuths(), alt);
    for (double v : hs.values) EXPECT_NEAR(v, std::sin(alt * std::numbers::pi / 180.0), 1e-12);
  }
}

TEST(Hillshade, SlopeFacingTheLightIsBrighter) {
  // Rises to the east, so it faces west.
  const auto plane = make_dem(8, 8, [](int, int c) { return c * 5.0; });
  const double west[] = {270.0}, east[] = {90.0};
  const auto lit = hillshade(plane, west, 45.0), dark = hillshade(plane, east, 45.0);
  for (std::size_t i = 0; i < plane.size(); ++i) EXPECT_GT(lit.values[i], dark.values[i]);
}

TEST(Hillshade, RangeAndErrors) {
  gen::Engine e(93);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = gen::dem(e, gen::integer(e, 1, 20), gen::integer(e, 1, 20), 0.2);
    for (double v : hillshade(d).values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  const auto d = make_dem(2, 2, [](int, int) { return 0.0; });
  EXPECT_THROW(hillshade(d, std::vector<double>{}, 45.0), Error);
  EXPECT_THROW(hillshade(d, default_azimuths(), 0.0), Error);
}

TEST(AerialModulate, Identities) {
  const auto d = make_dem(4, 4, [](int r, int c) { return r * 4.0 + c; });
  const auto hs = hillshade(d);
  const auto none = aerial_modulate(hs, d, 0.0);
  for (std::size_t i = 0; i < hs.values.size(); ++i) EXPECT_DOUBLE_EQ(none.values[i], hs.values[i]);
  // The highest cell keeps its shade at any strength.
  EXPECT_DOUBLE_EQ(aerial_modulate(hs, d, 1.0).values[15], hs.values[15]);
  // At full strength the lowest cell is pure haze.
  EXPECT_DOUBLE_EQ(aerial_modulate(hs, d, 1.0, 0.8).values[0], 0.8);
  EXPECT_THROW(aerial_modulate(hs, d, 1.5), Error);
}

TEST(AerialModulate, ContrastShrinksWithDepth) {
  gen::Engine e(94);
  const auto d = make_dem(1, 50, [](int, int c) { return c * 10.0; });
  Hillshade hs{1, 50, {}};
  for (int i = 0; i < 50; ++i) hs.values.push_back(gen::real(e, 0, 1));
  const auto m = aerial_modulate(hs, d, 0.6, 0.8);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_LE(std::abs(m.values[i] - 0.8), std::abs(hs.values[i] - 0.8) + 1e-12);
}

TEST(Render, GradedTwoZones) {
  auto d = make_dem(2, 3, [](int, int c) { return c * 100.0; });
  d.elevations[5] = -9999.0;
  const auto zm = classify_zones(d, 2);
  const TintScheme s{{{30, 20, 10}, {80, -10, 40}}, TintMode::graded};
  const auto rm = render(d, zm, s);
  std::set<RgbColor> seen(rm.pixels.begin(), rm.pixels.end());
  EXPECT_EQ(seen.size(), 3u);
  EXPECT_EQ(rm.pixels[0], lab_to_srgb(s.colors[0]));
  EXPECT_EQ(rm.pixels[2], lab_to_srgb(s.colors[1]));
  EXPECT_EQ(rm.pixels[5], kWhite);
  EXPECT_EQ(rm.valid[5], 0);
  EXPECT_THROW(render(d, zm, TintScheme{{{1, 0, 0}}, TintMode::graded}), Error);
}

TEST(Render, UnitShadeLeavesThePureTint) {
  gen::Engine e(95);
  const auto d = gen::dem(e, 10, 12);
  const auto zm = classify_zones(d, 5);
  const auto s = gen::scheme(e, 5);
  const Hillshade ones{10, 12, std::vector<double>(d.size(), 1.0)};
  EXPECT_EQ(render(d, zm, s, ones).pixels, render(d, zm, s).pixels);
}

TEST(Render, ContinuousRampMidpoint) {
  const auto d = make_dem(1, 3, [](int, int c) { return c * 50.0; });
  const TintScheme s{{{20, 0, 0}, {80, 0, 0}}, TintMode::continuous};
  const auto rm = render(d, classify_zones(d, 2), s);
  EXPECT_EQ(rm.pixels[1], lab_to_srgb({50, 0, 0}));
}

TEST(Render, InvariantUnderElevationShift) {
  gen::Engine e(96);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = gen::dem(e, 12, 9);
    auto shifted = d;
    for (auto& v : shifted.elevations) v += 1000.0;
    const auto s = gen::scheme(e, 4, gen::coin(e) ? TintMode::graded : TintMode::continuous);
    EXPECT_EQ(render(d, classify_zones(d, 4), s).pixels, render(shifted, classify_zones(shifted, 4), s).pixels);
  }
}

TEST(Render, PngRoundTripAndDeterministicBytes) {
  gen::Engine e(97);
  auto d = gen::dem(e, 7, 11);
  const auto zm = classify_zones(d, 3);
  const auto s = gen::scheme(e, 3);
  const auto rm = render(d, zm, s, hillshade(d));
  const auto bytes = encode_render(rm);
  EXPECT_EQ(bytes, encode_render(render(d, zm, s, hillshade(d))));
  const auto img = decode_image(bytes);
  ASSERT_EQ(img.width, 11);
  ASSERT_EQ(img.height, 7);
  EXPECT_EQ(img.pixels, rm.pixels);
  EXPECT_EQ(to_pixels(rm).channels, 3);

  d.elevations[3] = -9999.0;
  EXPECT_EQ(to_pixels(render(d, classify_zones(d, 3), s)).channels, 4);
}

TEST(TintStrip, GradedBlocks) {
  const std::vector<LabColor> colors = {{20, 0, 0}, {60, 30, 0}, {90, 0, 30}};
  const auto px = tint_strip(colors, false, 30, 2);
  const auto first = lab_to_srgb(colors[0]), last = lab_to_srgb(colors[2]);
  EXPECT_EQ(px.data[0], first.r);
  EXPECT_EQ(px.data[29 * 3], last.r);
  EXPECT_EQ(resize_to_width(px, 15).height, 1);
}
