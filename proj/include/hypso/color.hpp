#pragma once

// CIELab color math: sRGB (D65) conversion, Euclidean color difference and
// the chromaticity ratio used by the continuity score.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace hypso {

struct RgbColor {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend constexpr bool operator==(const RgbColor&, const RgbColor&) = default;
  friend constexpr auto operator<=>(const RgbColor&, const RgbColor&) = default;
};

struct LabColor {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;

  bool is_finite() const { return std::isfinite(L) && std::isfinite(a) && std::isfinite(b); }

  friend constexpr bool operator==(const LabColor&, const LabColor&) = default;
  friend constexpr auto operator<=>(const LabColor&, const LabColor&) = default;
};

namespace detail {

// D65 reference white, 2° observer.
inline constexpr double kWhiteX = 0.95047;
inline constexpr double kWhiteY = 1.00000;
inline constexpr double kWhiteZ = 1.08883;

inline constexpr double kEpsilon = 216.0 / 24389.0;  // (6/29)^3
inline constexpr double kKappa = 24389.0 / 27.0;     // (29/3)^3

inline double srgb_decode(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

inline double srgb_encode(double v) {
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

inline double lab_f(double t) {
  return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

inline double lab_f_inv(double f) {
  const double f3 = f * f * f;
  return f3 > kEpsilon ? f3 : (116.0 * f - 16.0) / kKappa;
}

}  // namespace detail

inline LabColor srgb_to_lab(RgbColor c) {
  using namespace detail;
  const double r = srgb_decode(c.r / 255.0);
  const double g = srgb_decode(c.g / 255.0);
  const double b = srgb_decode(c.b / 255.0);

  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

  const double fx = lab_f(x / kWhiteX);
  const double fy = lab_f(y / kWhiteY);
  const double fz = lab_f(z / kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

struct GamutMapped {
  RgbColor rgb;
  bool clipped = false;  // at least one channel fell outside [0, 1] before clamping
};

inline GamutMapped lab_to_srgb_checked(const LabColor& c) {
  using namespace detail;
  const double fy = (c.L + 16.0) / 116.0;
  const double fx = fy + c.a / 500.0;
  const double fz = fy - c.b / 200.0;
  const double x = kWhiteX * lab_f_inv(fx);
  const double y = kWhiteY * lab_f_inv(fy);
  const double z = kWhiteZ * lab_f_inv(fz);

  const std::array<double, 3> lin = {
      3.2404542 * x - 1.5371385 * y - 0.4985314 * z,
      -0.9692660 * x + 1.8760108 * y + 0.0415560 * z,
      0.0556434 * x - 0.2040259 * y + 1.0572252 * z,
  };

  constexpr double kSlack = 1e-6;
  GamutMapped out;
  std::array<std::uint8_t, 3> ch{};
  for (int i = 0; i < 3; ++i) {
    if (!(lin[i] >= -kSlack && lin[i] <= 1.0 + kSlack)) out.clipped = true;
    const double enc = srgb_encode(std::clamp(lin[i], 0.0, 1.0));
    ch[i] = static_cast<std::uint8_t>(std::lround(std::clamp(enc, 0.0, 1.0) * 255.0));
  }
  out.rgb = {ch[0], ch[1], ch[2]};
  return out;
}

inline RgbColor lab_to_srgb(const LabColor& c) { return lab_to_srgb_checked(c).rgb; }

inline double delta_e(const LabColor& x, const LabColor& y) {
  const double dL = x.L - y.L;
  const double da = x.a - y.a;
  const double db = x.b - y.b;
  return std::sqrt(dL * dL + da * da + db * db);
}

// sqrt(a²+b²) / sqrt(L²+a²+b²); the all-zero color is achromatic (0).
inline double chroma_ratio(const LabColor& c) {
  const double chroma2 = c.a * c.a + c.b * c.b;
  const double norm2 = c.L * c.L + chroma2;
  if (norm2 == 0.0) return 0.0;
  return std::min(1.0, std::sqrt(chroma2) / std::sqrt(norm2));
}

inline double chroma(const LabColor& c) { return std::hypot(c.a, c.b); }

// Hue angle in degrees, [0, 360).
inline double hue_degrees(const LabColor& c) {
  double h = std::atan2(c.b, c.a) * 180.0 / 3.14159265358979323846;
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

inline LabColor lerp(const LabColor& x, const LabColor& y, double t) {
  return {x.L + (y.L - x.L) * t, x.a + (y.a - x.a) * t, x.b + (y.b - x.b) * t};
}

}  // namespace hypso
