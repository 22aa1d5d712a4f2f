#pragma once

// Scheme-level objectives. The subjective score F_s multiplies continuity,
// aerial perspective and color-convention terms; the aesthetic score F_a
// multiplies dominant-color similarity with color harmony.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "hypso/color.hpp"
#include "hypso/error.hpp"
#include "hypso/grid.hpp"
#include "hypso/harmony.hpp"

namespace hypso {

enum class TintMode { graded, continuous };

struct TintScheme {
  std::vector<LabColor> colors;  // index 0 = lowest elevation zone
  TintMode mode = TintMode::graded;

  std::size_t size() const { return colors.size(); }
};

// Zone index (1-based, low to high) -> conventional color for that zone.
struct ConventionSpec {
  std::map<int, LabColor> assignments;

  bool empty() const { return assignments.empty(); }
};

struct ScoringParams {
  int k = 3;             // polynomial degree of the continuity fit, 1..3
  int t = 1;             // +1: lighter with elevation, -1: darker
  double gamma = 10.0;   // convention ΔE threshold
  double alpha = 10.0;   // similarity ΔE threshold
  bool aerial_enabled = false;
  int ramp_samples = 64; // continuous-mode samples S

  void validate() const {
    if (k < 1 || k > 3) detail::fail(Errc::invalid_argument, "k must be 1, 2 or 3");
    if (t != 1 && t != -1) detail::fail(Errc::invalid_argument, "t must be +1 or -1");
    if (!(gamma > 0.0)) detail::fail(Errc::invalid_argument, "gamma must be positive");
    if (!(alpha > 0.0)) detail::fail(Errc::invalid_argument, "alpha must be positive");
    if (ramp_samples < 2) detail::fail(Errc::invalid_argument, "ramp_samples must be at least 2");
  }
};

// Map-side mass: per-zone area fractions in graded mode, per-sliver
// elevation mass (length ramp_samples) in continuous mode.
struct ZoneAreas {
  std::vector<double> proportions;

  std::size_t size() const { return proportions.size(); }
};

struct ScoreReport {
  double f_g = 0.0;
  double f_ap = 0.0;
  double f_c = 0.0;
  double F_s = 0.0;
  double f_d = 0.0;
  double harmony = 0.0;
  double F_a = 0.0;
};

namespace detail {

inline void require_scheme(const TintScheme& scheme) {
  if (scheme.size() < 2) fail(Errc::invalid_argument, "a tint scheme needs at least two colors");
}

// Coefficient of determination of a least-squares polynomial fit over
// x = 1..n. Exact fits (n <= degree + 1) and constant data give 1.
inline double polyfit_r2(std::span<const double> y, int degree) {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (n <= degree + 1) return 1.0;
  Eigen::VectorXd rhs(n);
  double mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mean += (rhs(i) = y[static_cast<std::size_t>(i)]);
  mean /= static_cast<double>(n);
  double ss_tot = 0.0, sumsq = 0.0;
  for (double v : y) ss_tot += (v - mean) * (v - mean), sumsq += v * v;
  if (ss_tot <= 1e-24 * (1.0 + sumsq)) return 1.0;

  Eigen::MatrixXd vander(n, degree + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int d = 0; d <= degree; ++d, p *= static_cast<double>(i + 1)) vander(i, d) = p;
  }
  const Eigen::VectorXd coef = vander.colPivHouseholderQr().solve(rhs);
  const double ss_res = (vander * coef - rhs).squaredNorm();
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

// Slope of the degree-1 least-squares fit over x = 1..n.
inline double linear_trend(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  const double xbar = (n + 1.0) / 2.0;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dx = static_cast<double>(i + 1) - xbar;
    sxy += dx * (y[i] - ybar);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace detail

// f_g = R²_k(L) · R²_k(chroma ratio) · gate. The gate is 1 when the overall
// (degree-1) lightness trend has the sign of t, 0 otherwise; trends within
// 1e-12 of zero count as flat.
inline double continuity_score(const TintScheme& scheme, const ScoringParams& params) {
  detail::require_scheme(scheme);
  std::vector<double> lum, chr;
  double scale = 1.0;
  for (const auto& c : scheme.colors) {
    lum.push_back(c.L);
    chr.push_back(chroma_ratio(c));
    scale = std::max(scale, std::fabs(c.L));
  }
  const double slope = detail::linear_trend(lum);
  if (!(slope * params.t > 1e-12 * scale)) return 0.0;
  return detail::polyfit_r2(lum, params.k) * detail::polyfit_r2(chr, params.k);
}

// Share of positive second differences of successive ΔE (contrast growing
// toward the high, near zones).
inline double aerial_score(const TintScheme& scheme, const ScoringParams& params) {
  detail::require_scheme(scheme);
  if (!params.aerial_enabled) return 1.0;
  std::vector<double> step;
  for (std::size_t i = 0; i + 1 < scheme.size(); ++i) step.push_back(delta_e(scheme.colors[i + 1], scheme.colors[i]));
  double pos = 0.0, abs = 0.0;
  for (std::size_t i = 1; i < step.size(); ++i) {
    const double dd = step[i] - step[i - 1];
    pos += std::max(0.0, dd);
    abs += std::fabs(dd);
  }
  return abs == 0.0 ? 1.0 : pos / abs;
}

// Mean of min(1, γ/ΔE) over zones that carry a convention; 1 when none do.
inline double convention_score(const TintScheme& scheme, const ConventionSpec& conventions, const ScoringParams& params) {
  detail::require_scheme(scheme);
  if (conventions.empty()) return 1.0;
  double sum = 0.0;
  for (const auto& [zone, expected] : conventions.assignments) {
    if (zone < 1 || zone > static_cast<int>(scheme.size()))
      detail::fail(Errc::invalid_argument, "convention zone out of range");
    const double d = delta_e(scheme.colors[static_cast<std::size_t>(zone - 1)], expected);
    sum += d == 0.0 ? 1.0 : std::min(1.0, params.gamma / d);
  }
  return sum / static_cast<double>(conventions.assignments.size());
}

inline double subjective_score(const TintScheme& scheme, const ConventionSpec& conventions, const ScoringParams& params) {
  return continuity_score(scheme, params) * aerial_score(scheme, params) * convention_score(scheme, conventions, params);
}

struct MapColor {
  LabColor color;
  double mass = 0.0;
};

// The colors a scheme paints on the map with their area mass: the zone colors
// in graded mode, evenly spaced ramp samples in continuous mode.
inline std::vector<MapColor> map_colors(const TintScheme& scheme, const ZoneAreas& areas, const ScoringParams& params) {
  detail::require_scheme(scheme);
  std::vector<MapColor> out;
  if (scheme.mode == TintMode::graded) {
    if (areas.size() != scheme.size()) detail::fail(Errc::dimension_mismatch, "zone areas do not match scheme size");
    for (std::size_t i = 0; i < scheme.size(); ++i) out.push_back({scheme.colors[i], areas.proportions[i]});
  } else {
    const auto s = static_cast<std::size_t>(params.ramp_samples);
    if (areas.size() != s) detail::fail(Errc::dimension_mismatch, "ramp masses do not match ramp_samples");
    for (std::size_t k = 0; k < s; ++k)
      out.push_back({ramp_color(scheme.colors, static_cast<double>(k) / static_cast<double>(s - 1)), areas.proportions[k]});
  }
  return out;
}

// f_d: each map color is anchored to its closest dominant color and credits it
// with mass · min(1, α/ΔE); the image and map proportions are then compared
// per dominant color.
inline double similarity_score(const TintScheme& scheme, const DominantProfile& profile, const ZoneAreas& areas,
                               const ScoringParams& params) {
  if (profile.empty()) detail::fail(Errc::empty_input, "empty dominant profile");
  const auto colors = map_colors(scheme, areas, params);
  std::vector<double> p_map(profile.size(), 0.0);
  for (const auto& mc : colors) {
    std::size_t anchor = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < profile.size(); ++i) {
      const double d = delta_e(profile.entries[i].color, mc.color);
      if (d < best) {
        best = d;
        anchor = i;
      }
    }
    const double w = best == 0.0 ? 1.0 : std::min(1.0, params.alpha / best);
    p_map[anchor] += mc.mass * w;
  }
  double f = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double pi = profile.entries[i].proportion;
    const double pm = p_map[i];
    const double hi = std::max(pi, pm);
    const double ratio = hi == 0.0 ? 1.0 : std::min(pi, pm) / hi;
    f += pi * ratio;
  }
  return std::clamp(f, 0.0, 1.0);
}

inline double aesthetic_score(const TintScheme& scheme, const DominantProfile& profile, const ZoneAreas& areas,
                              const ScoringParams& params, const HarmonyScorer& scorer = default_harmony_scorer()) {
  return similarity_score(scheme, profile, areas, params) * harmony_score(scheme.colors, scorer);
}

inline constexpr double kDefaultDeltaMin = 10.0;

// Number of color pairs closer than delta_min.
inline int discrimination_violations(const TintScheme& scheme, double delta_min = kDefaultDeltaMin) {
  int count = 0;
  for (std::size_t i = 0; i < scheme.size(); ++i)
    for (std::size_t j = i + 1; j < scheme.size(); ++j)
      if (delta_e(scheme.colors[i], scheme.colors[j]) < delta_min) ++count;
  return count;
}

// Graded schemes: every pair of colors at least delta_min apart (inclusive).
inline bool discrimination_check(const TintScheme& scheme, double delta_min = kDefaultDeltaMin) {
  return discrimination_violations(scheme, delta_min) == 0;
}

inline ScoreReport score_scheme(const TintScheme& scheme, const ConventionSpec& conventions, const DominantProfile& profile,
                                const ZoneAreas& areas, const ScoringParams& params,
                                const HarmonyScorer& scorer = default_harmony_scorer()) {
  ScoreReport r;
  r.f_g = continuity_score(scheme, params);
  r.f_ap = aerial_score(scheme, params);
  r.f_c = convention_score(scheme, conventions, params);
  r.F_s = r.f_g * r.f_ap * r.f_c;
  r.f_d = similarity_score(scheme, profile, areas, params);
  r.harmony = harmony_score(scheme.colors, scorer);
  r.F_a = r.f_d * r.harmony;
  return r;
}

}  // namespace hypso
