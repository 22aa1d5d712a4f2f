#pragma once

// DEM ingestion, elevation zoning, hillshading and hypsometric rendering.

#include <algorithm>
#include <array>
#include <charconv>
#include <limits>
#include <map>
#include <cmath>
#include <cctype>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hypso/color.hpp"
#include "hypso/error.hpp"
#include "hypso/grid.hpp"
#include "hypso/raster_io.hpp"
#include "hypso/scoring.hpp"

namespace hypso {

struct Dem {
  int rows = 0;
  int cols = 0;
  double cellsize = 1.0;
  std::optional<double> nodata;
  std::vector<double> elevations;  // row-major, meters

  std::size_t size() const { return elevations.size(); }
  bool valid(std::size_t i) const {
    const double e = elevations[i];
    return std::isfinite(e) && !(nodata && e == *nodata);
  }
  std::size_t valid_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < size(); ++i) n += valid(i);
    return n;
  }
  // {min, max} over valid cells.
  std::pair<double, double> range() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < size(); ++i) {
      if (!valid(i)) continue;
      lo = std::min(lo, elevations[i]);
      hi = std::max(hi, elevations[i]);
    }
    return {lo, hi};
  }
};

namespace detail {

inline void check_dem(const Dem& dem) {
  if (dem.rows < 1 || dem.cols < 1 || dem.size() != static_cast<std::size_t>(dem.rows) * dem.cols)
    fail(Errc::dimension_mismatch, "DEM size does not match rows x cols");
  if (dem.valid_count() == 0) fail(Errc::all_nodata, "DEM has no valid cells");
}

inline bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace detail

// ESRI ASCII grid. Header keys are case-insensitive; NODATA_value optional.
inline Dem parse_asc(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }

  std::map<std::string, double> header;
  std::size_t pos = 0;
  while (pos < tokens.size() && std::isalpha(static_cast<unsigned char>(tokens[pos].front()))) {
    const std::string key = detail::lower(tokens[pos]);
    static const std::vector<std::string> known = {"ncols", "nrows", "xllcorner", "yllcorner", "xllcenter",
                                                   "yllcenter", "cellsize", "nodata_value"};
    if (std::find(known.begin(), known.end(), key) == known.end())
      detail::fail(Errc::malformed_header, "unknown header key: " + std::string(tokens[pos]));
    double v = 0.0;
    if (pos + 1 >= tokens.size() || !detail::parse_double(tokens[pos + 1], v))
      detail::fail(Errc::malformed_header, "bad value for header key " + key);
    header[key] = v;
    pos += 2;
  }
  for (const char* required : {"ncols", "nrows", "cellsize"})
    if (!header.count(required)) detail::fail(Errc::malformed_header, std::string("missing header key ") + required);
  const double ncols = header["ncols"], nrows = header["nrows"];
  if (ncols < 1 || nrows < 1 || ncols != std::floor(ncols) || nrows != std::floor(nrows))
    detail::fail(Errc::malformed_header, "ncols/nrows must be positive integers");
  if (!(header["cellsize"] > 0.0)) detail::fail(Errc::malformed_header, "cellsize must be positive");

  Dem dem;
  dem.cols = static_cast<int>(ncols);
  dem.rows = static_cast<int>(nrows);
  dem.cellsize = header["cellsize"];
  if (header.count("nodata_value")) dem.nodata = header["nodata_value"];
  const std::size_t expected = static_cast<std::size_t>(dem.rows) * dem.cols;
  if (tokens.size() - pos != expected)
    detail::fail(Errc::dimension_mismatch, "expected " + std::to_string(expected) + " values, found " +
                                               std::to_string(tokens.size() - pos));
  dem.elevations.reserve(expected);
  for (; pos < tokens.size(); ++pos) {
    double v = 0.0;
    if (!detail::parse_double(tokens[pos], v)) detail::fail(Errc::decode_error, "non-numeric DEM value");
    dem.elevations.push_back(v);
  }
  detail::check_dem(dem);
  return dem;
}

// 16-bit grayscale heightmap; the sidecar gives {min_elev, max_elev,
// cellsize, nodata?} where nodata is a raw gray level.
inline Dem decode_png_dem(const Bytes& png, std::string_view sidecar_json) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(sidecar_json);
  } catch (const nlohmann::json::exception& e) {
    detail::fail(Errc::malformed_header, std::string("heightmap sidecar: ") + e.what());
  }
  if (!meta.is_object() || !meta.contains("min_elev") || !meta.contains("max_elev") ||
      !meta["min_elev"].is_number() || !meta["max_elev"].is_number())
    detail::fail(Errc::malformed_header, "heightmap sidecar needs numeric min_elev and max_elev");
  const double lo = meta["min_elev"].get<double>();
  const double hi = meta["max_elev"].get<double>();
  const Gray16 g = decode_gray16(png);
  Dem dem;
  dem.rows = g.height;
  dem.cols = g.width;
  dem.cellsize = meta.value("cellsize", 1.0);
  std::optional<std::uint16_t> nodata_gray;
  if (meta.contains("nodata") && !meta["nodata"].is_null()) nodata_gray = meta["nodata"].get<std::uint16_t>();
  dem.elevations.resize(g.data.size());
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    if (nodata_gray && g.data[i] == *nodata_gray) {
      dem.elevations[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double t = g.data[i] / 65535.0;
    dem.elevations[i] = (1.0 - t) * lo + t * hi;
  }
  detail::check_dem(dem);
  return dem;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& png) {
  auto p = png;
  p.replace_extension(".json");
  return p;
}

inline Dem load_dem(const std::filesystem::path& path) {
  const std::string ext = detail::lower(path.extension().string());
  if (ext == ".asc") {
    const Bytes data = read_file(path);
    return parse_asc(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
  }
  if (ext == ".png") {
    const Bytes png = read_file(path);
    const Bytes meta = read_file(sidecar_path(path));
    return decode_png_dem(png, std::string_view(reinterpret_cast<const char*>(meta.data()), meta.size()));
  }
  detail::fail(Errc::unsupported_format, "DEM must be .asc or .png: " + path.string());
}

enum class ZoneMethod { equal_interval, quantile };

struct ZoneMap {
  int n = 0;
  std::vector<double> boundaries;  // n + 1 ascending breakpoints
  std::vector<int> zone;           // per cell, -1 for nodata
  std::vector<std::string> notices;
};

inline constexpr int kDefaultZones = 9;

// Per-cell elevation scaled to [0, 1] over the valid range; a flat DEM maps to 0.
inline std::vector<double> normalized_elevation(const Dem& dem) {
  const auto [lo, hi] = dem.range();
  std::vector<double> out(dem.size(), 0.0);
  for (std::size_t i = 0; i < dem.size(); ++i)
    if (dem.valid(i) && hi > lo) out[i] = (dem.elevations[i] - lo) / (hi - lo);
  return out;
}

namespace detail {

inline void assign_zones(const Dem& dem, ZoneMap& zm) {
  zm.zone.assign(dem.size(), -1);
  for (std::size_t i = 0; i < dem.size(); ++i) {
    if (!dem.valid(i)) continue;
    const double e = dem.elevations[i];
    auto it = std::upper_bound(zm.boundaries.begin() + 1, zm.boundaries.end() - 1, e);
    zm.zone[i] = static_cast<int>(it - (zm.boundaries.begin() + 1));
  }
}

}  // namespace detail

inline ZoneMap classify_zones(const Dem& dem, int n, ZoneMethod method = ZoneMethod::equal_interval) {
  detail::check_dem(dem);
  if (n < 2) detail::fail(Errc::invalid_argument, "at least two zones are required");
  const auto [lo, hi] = dem.range();
  ZoneMap zm;
  zm.n = n;

  if (method == ZoneMethod::equal_interval) {
    const double span = hi > lo ? hi - lo : 1.0;
    for (int i = 0; i <= n; ++i) zm.boundaries.push_back(i == n && hi > lo ? hi : lo + span * i / n);
    detail::assign_zones(dem, zm);
    return zm;
  }

  if (hi == lo) {
    zm.n = 1;
    zm.boundaries = {lo, lo + 1.0};
    zm.notices.emplace_back("constant DEM: quantile zoning collapsed to a single zone");
    detail::assign_zones(dem, zm);
    return zm;
  }
  std::vector<double> sorted;
  for (std::size_t i = 0; i < dem.size(); ++i)
    if (dem.valid(i)) sorted.push_back(dem.elevations[i]);
  std::sort(sorted.begin(), sorted.end());
  zm.boundaries.push_back(lo);
  for (int i = 1; i < n; ++i) {
    const std::size_t at = sorted.size() * static_cast<std::size_t>(i) / static_cast<std::size_t>(n);
    double b = sorted[at];
    if (b <= zm.boundaries.back()) {
      // Ties: move to the next distinct elevation.
      auto next = std::upper_bound(sorted.begin(), sorted.end(), zm.boundaries.back());
      if (next == sorted.end() || *next >= hi) {
        zm.notices.emplace_back("quantile breakpoints collapsed; using equal intervals");
        return classify_zones(dem, n, ZoneMethod::equal_interval);
      }
      b = *next;
    }
    if (b >= hi) {
      zm.notices.emplace_back("quantile breakpoints collapsed; using equal intervals");
      return classify_zones(dem, n, ZoneMethod::equal_interval);
    }
    zm.boundaries.push_back(b);
  }
  zm.boundaries.push_back(hi);
  detail::assign_zones(dem, zm);
  return zm;
}

inline ZoneAreas zone_areas(const ZoneMap& zm) {
  ZoneAreas areas{std::vector<double>(static_cast<std::size_t>(zm.n), 0.0)};
  std::size_t total = 0;
  for (int z : zm.zone) {
    if (z < 0) continue;
    areas.proportions[static_cast<std::size_t>(z)] += 1.0;
    ++total;
  }
  if (total == 0) detail::fail(Errc::all_nodata, "zone map has no valid cells");
  for (auto& p : areas.proportions) p /= static_cast<double>(total);
  return areas;
}

// Valid-cell mass per elevation sliver [k/S, (k+1)/S), the top sliver closed.
inline ZoneAreas elevation_slivers(const Dem& dem, int samples) {
  detail::check_dem(dem);
  if (samples < 2) detail::fail(Errc::invalid_argument, "at least two ramp samples are required");
  const auto e = normalized_elevation(dem);
  ZoneAreas out{std::vector<double>(static_cast<std::size_t>(samples), 0.0)};
  std::size_t total = 0;
  for (std::size_t i = 0; i < dem.size(); ++i) {
    if (!dem.valid(i)) continue;
    const auto k = std::min(static_cast<std::size_t>(e[i] * samples), static_cast<std::size_t>(samples - 1));
    out.proportions[k] += 1.0;
    ++total;
  }
  for (auto& p : out.proportions) p /= static_cast<double>(total);
  return out;
}

// Ramp samples at k/(S-1) with the mass of the sliver each one colors.
inline std::vector<MapColor> ramp_mass(const Dem& dem, const TintScheme& scheme, int samples) {
  if (scheme.size() < 2) detail::fail(Errc::invalid_argument, "a tint scheme needs at least two colors");
  if (samples < static_cast<int>(scheme.size())) detail::fail(Errc::invalid_argument, "samples must be >= scheme size");
  const auto slivers = elevation_slivers(dem, samples);
  std::vector<MapColor> out;
  for (int k = 0; k < samples; ++k)
    out.push_back({ramp_color(scheme.colors, static_cast<double>(k) / (samples - 1)),
                   slivers.proportions[static_cast<std::size_t>(k)]});
  return out;
}

struct Hillshade {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // each in [0, 1]
};

inline const std::vector<double>& default_azimuths() {
  static const std::vector<double> az = {225.0, 270.0, 315.0, 360.0};
  return az;
}

inline constexpr double kDefaultAltitude = 45.0;

// Lambertian shade averaged over light azimuths (degrees clockwise from
// north). Gradients are central differences, one-sided at the border; nodata
// neighbours take the centre cell's elevation.
inline Hillshade hillshade(const Dem& dem, std::span<const double> azimuths, double altitude = kDefaultAltitude) {
  detail::check_dem(dem);
  if (azimuths.empty()) detail::fail(Errc::invalid_argument, "at least one azimuth is required");
  if (!(altitude > 0.0 && altitude <= 90.0)) detail::fail(Errc::invalid_argument, "altitude must be in (0, 90]");

  constexpr double deg = std::numbers::pi / 180.0;
  std::vector<std::array<double, 3>> lights;
  for (double az : azimuths)
    lights.push_back({std::sin(az * deg) * std::cos(altitude * deg), std::cos(az * deg) * std::cos(altitude * deg),
                      std::sin(altitude * deg)});

  Hillshade hs{dem.rows, dem.cols, std::vector<double>(dem.size(), 0.0)};
  auto z = [&](int r, int c, double fallback) {
    const std::size_t i = static_cast<std::size_t>(r) * dem.cols + c;
    return dem.valid(i) ? dem.elevations[i] : fallback;
  };
  for (int r = 0; r < dem.rows; ++r) {
    for (int c = 0; c < dem.cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * dem.cols + c;
      if (!dem.valid(i)) continue;
      const double z0 = dem.elevations[i];
      double dzdx = 0.0, dzdn = 0.0;  // east and north
      if (dem.cols > 1) {
        const int c0 = std::max(0, c - 1), c1 = std::min(dem.cols - 1, c + 1);
        dzdx = (z(r, c1, z0) - z(r, c0, z0)) / ((c1 - c0) * dem.cellsize);
      }
      if (dem.rows > 1) {
        const int r0 = std::max(0, r - 1), r1 = std::min(dem.rows - 1, r + 1);
        dzdn = (z(r0, c, z0) - z(r1, c, z0)) / ((r1 - r0) * dem.cellsize);
      }
      const double norm = std::sqrt(dzdx * dzdx + dzdn * dzdn + 1.0);
      const double nx = -dzdx / norm, ny = -dzdn / norm, nz = 1.0 / norm;
      double sum = 0.0;
      for (const auto& l : lights) sum += std::max(0.0, nx * l[0] + ny * l[1] + nz * l[2]);
      hs.values[i] = std::clamp(sum / static_cast<double>(lights.size()), 0.0, 1.0);
    }
  }
  return hs;
}

inline Hillshade hillshade(const Dem& dem) { return hillshade(dem, default_azimuths(), kDefaultAltitude); }

inline constexpr double kDefaultHaze = 0.8;
inline constexpr double kDefaultAerialStrength = 0.6;

// Contrast falls off toward `haze` with decreasing elevation (distance from an
// overhead viewer); the highest cells keep their shade.
inline Hillshade aerial_modulate(const Hillshade& hs, const Dem& dem, double strength = kDefaultAerialStrength,
                                 double haze = kDefaultHaze) {
  if (hs.values.size() != dem.size()) detail::fail(Errc::dimension_mismatch, "hillshade does not match DEM");
  if (!(strength >= 0.0 && strength <= 1.0)) detail::fail(Errc::invalid_argument, "strength must be in [0, 1]");
  if (!(haze >= 0.0 && haze <= 1.0)) detail::fail(Errc::invalid_argument, "haze must be in [0, 1]");
  const auto e = normalized_elevation(dem);
  Hillshade out = hs;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (!dem.valid(i)) continue;
    const double factor = (1.0 - strength) + strength * e[i];
    out.values[i] = std::clamp(haze + (hs.values[i] - haze) * factor, 0.0, 1.0);
  }
  return out;
}

struct RenderedMap {
  int rows = 0;
  int cols = 0;
  std::vector<RgbColor> pixels;
  std::vector<std::uint8_t> valid;  // 0 for nodata (background) cells

  bool has_nodata() const { return std::find(valid.begin(), valid.end(), 0) != valid.end(); }
};

inline constexpr RgbColor kWhite{255, 255, 255};

// Tint per cell (zone color when graded, ramp color at the normalised
// elevation when continuous), optionally shaded by scaling Lab lightness with
// 0.3 + 0.7 * shade.
inline RenderedMap render(const Dem& dem, const ZoneMap& zm, const TintScheme& scheme,
                          const std::optional<Hillshade>& shade = std::nullopt, RgbColor background = kWhite) {
  detail::check_dem(dem);
  if (zm.zone.size() != dem.size()) detail::fail(Errc::dimension_mismatch, "zone map does not match DEM");
  if (scheme.size() < 1) detail::fail(Errc::invalid_argument, "empty tint scheme");
  if (scheme.mode == TintMode::graded && static_cast<int>(scheme.size()) != zm.n)
    detail::fail(Errc::dimension_mismatch, "graded scheme size must equal the zone count");
  if (shade && shade->values.size() != dem.size()) detail::fail(Errc::dimension_mismatch, "hillshade does not match DEM");

  const auto e = normalized_elevation(dem);
  RenderedMap out{dem.rows, dem.cols, std::vector<RgbColor>(dem.size(), background),
                  std::vector<std::uint8_t>(dem.size(), 0)};
  for (std::size_t i = 0; i < dem.size(); ++i) {
    if (!dem.valid(i) || zm.zone[i] < 0) continue;
    LabColor tint = scheme.mode == TintMode::graded ? scheme.colors[static_cast<std::size_t>(zm.zone[i])]
                                                    : ramp_color(scheme.colors, e[i]);
    if (shade) tint.L *= 1.0 - 0.7 * (1.0 - shade->values[i]);
    out.pixels[i] = lab_to_srgb(tint);
    out.valid[i] = 1;
  }
  return out;
}

// RGB, or RGBA with transparent nodata cells.
inline Pixels8 to_pixels(const RenderedMap& rm) {
  const bool alpha = rm.has_nodata();
  Pixels8 px{rm.cols, rm.rows, alpha ? 4 : 3, {}};
  px.data.reserve(rm.pixels.size() * px.channels);
  for (std::size_t i = 0; i < rm.pixels.size(); ++i) {
    px.data.push_back(rm.pixels[i].r);
    px.data.push_back(rm.pixels[i].g);
    px.data.push_back(rm.pixels[i].b);
    if (alpha) px.data.push_back(rm.valid[i] ? 255 : 0);
  }
  return px;
}

inline Bytes encode_render(const RenderedMap& rm) { return encode_png(to_pixels(rm)); }

inline void write_png(const RenderedMap& rm, const std::filesystem::path& path) { write_file(path, encode_render(rm)); }

// Horizontal swatch strip: equal blocks in graded mode, a smooth ramp when
// continuous.
inline Pixels8 tint_strip(std::span<const LabColor> colors, bool continuous, int width = 360, int height = 40) {
  if (colors.empty()) detail::fail(Errc::invalid_argument, "no colors for the strip");
  Pixels8 px{width, height, 3, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3)};
  for (int x = 0; x < width; ++x) {
    const double u = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
    LabColor c;
    if (continuous) {
      c = ramp_color(colors, u);
    } else {
      const std::size_t k = std::min(colors.size() - 1, static_cast<std::size_t>(x * colors.size() / width));
      c = colors[k];
    }
    const RgbColor rgb = lab_to_srgb(c);
    for (int y = 0; y < height; ++y) {
      auto* p = &px.data[(static_cast<std::size_t>(y) * width + x) * 3];
      p[0] = rgb.r;
      p[1] = rgb.g;
      p[2] = rgb.b;
    }
  }
  return px;
}

// Nearest-neighbour rescale to the given width, aspect preserved.
inline Pixels8 resize_to_width(const Pixels8& src, int width) {
  if (width < 1) detail::fail(Errc::invalid_argument, "width must be positive");
  const int height = std::max(1, static_cast<int>(std::lround(static_cast<double>(src.height) * width / src.width)));
  Pixels8 out{width, height, src.channels, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * src.channels)};
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(src.height - 1, y * src.height / height);
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(src.width - 1, x * src.width / width);
      std::copy_n(&src.data[(static_cast<std::size_t>(sy) * src.width + sx) * src.channels], src.channels,
                  &out.data[(static_cast<std::size_t>(y) * width + x) * src.channels]);
    }
  }
  return out;
}

}  // namespace hypso
