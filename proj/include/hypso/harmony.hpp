#pragma once

// Pluggable color-harmony scoring. The default scorer fits the palette's
// hue angles to the rotated hue templates of Matsuda's color wheel.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hypso/color.hpp"
#include "hypso/error.hpp"

namespace hypso {

class HarmonyScorer {
 public:
  virtual ~HarmonyScorer() = default;
  // Score in [0, 1]; must be deterministic for a fixed palette.
  virtual double score(std::span<const LabColor> colors) const = 0;
  virtual std::string_view name() const = 0;
};

struct HueSector {
  double center;  // degrees, relative to the template rotation
  double width;   // degrees
};

struct HueTemplate {
  std::string_view name;
  std::vector<HueSector> sectors;
};

inline const std::vector<HueTemplate>& matsuda_templates() {
  // The gray-only "N" template is covered by the achromatic exemption.
  static const std::vector<HueTemplate> templates = {
      {"i", {{0.0, 18.0}}},
      {"V", {{0.0, 93.6}}},
      {"L", {{0.0, 18.0}, {90.0, 79.2}}},
      {"I", {{0.0, 18.0}, {180.0, 18.0}}},
      {"T", {{0.0, 180.0}}},
      {"Y", {{0.0, 93.6}, {180.0, 18.0}}},
      {"X", {{0.0, 93.6}, {180.0, 93.6}}},
  };
  return templates;
}

namespace detail {

inline double wrap_degrees(double x) {
  x = std::fmod(x, 360.0);
  return x < 0.0 ? x + 360.0 : x;
}

inline double angular_distance(double x, double y) {
  const double d = std::fabs(wrap_degrees(x - y));
  return std::min(d, 360.0 - d);
}

inline double template_deviation(const HueTemplate& tpl, double rotation, std::span<const double> hues) {
  double total = 0.0;
  for (double h : hues) {
    double best = 360.0;
    for (const auto& s : tpl.sectors) {
      const double d = angular_distance(h, s.center + rotation) - 0.5 * s.width;
      best = std::min(best, std::max(0.0, d));
    }
    total += best;
  }
  return total;
}

}  // namespace detail

// score = 1 - (best template deviation) / (90° per chromatic color).
// The wide "T" template never deviates by more than 90° per hue, so the
// ratio stays within [0, 1]. Colors with Lab chroma below the achromatic
// threshold carry no hue and are not penalised.
class TemplateHarmonyScorer final : public HarmonyScorer {
 public:
  explicit TemplateHarmonyScorer(double achromatic_chroma = 5.0) : achromatic_chroma_(achromatic_chroma) {}

  double score(std::span<const LabColor> colors) const override {
    std::vector<double> hues;
    hues.reserve(colors.size());
    for (const auto& c : colors)
      if (chroma(c) >= achromatic_chroma_) hues.push_back(hue_degrees(c));
    if (hues.empty()) return 1.0;
    const double dev = best_deviation(hues);
    return std::clamp(1.0 - dev / (90.0 * static_cast<double>(hues.size())), 0.0, 1.0);
  }

  std::string_view name() const override { return "matsuda-template"; }

  // The total deviation is piecewise linear in the rotation angle and its
  // minima sit where some hue touches a sector border, so checking those
  // rotations is exact.
  static double best_deviation(std::span<const double> hues) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& tpl : matsuda_templates()) {
      for (double h : hues) {
        for (const auto& s : tpl.sectors) {
          for (double side : {-0.5, 0.5}) {
            const double rotation = h - s.center + side * s.width;
            best = std::min(best, detail::template_deviation(tpl, rotation, hues));
          }
        }
      }
    }
    return best;
  }

 private:
  double achromatic_chroma_;
};

using HarmonyFactory = std::function<std::unique_ptr<HarmonyScorer>()>;

// Named scorers selectable from configuration.
class HarmonyRegistry {
 public:
  static HarmonyRegistry& instance() {
    static HarmonyRegistry registry;
    return registry;
  }

  void add(std::string name, HarmonyFactory factory) {
    std::lock_guard lock(mutex_);
    factories_[std::move(name)] = std::move(factory);
  }

  std::unique_ptr<HarmonyScorer> make(const std::string& name) const {
    std::lock_guard lock(mutex_);
    auto it = factories_.find(name);
    if (it == factories_.end()) detail::fail(Errc::invalid_argument, "unknown harmony scorer: " + name);
    return it->second();
  }

  std::vector<std::string> names() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [k, _] : factories_) out.push_back(k);
    return out;
  }

 private:
  HarmonyRegistry() {
    factories_["matsuda-template"] = [] { return std::make_unique<TemplateHarmonyScorer>(); };
  }

  mutable std::mutex mutex_;
  std::map<std::string, HarmonyFactory> factories_;
};

inline const HarmonyScorer& default_harmony_scorer() {
  static const TemplateHarmonyScorer scorer;
  return scorer;
}

inline double harmony_score(std::span<const LabColor> colors, const HarmonyScorer& scorer = default_harmony_scorer()) {
  if (colors.size() < 2) detail::fail(Errc::insufficient_palette, "harmony needs at least two colors");
  return std::clamp(scorer.score(colors), 0.0, 1.0);
}

}  // namespace hypso
