#pragma once

// Reference-image analysis: decoding, saliency, salient color extraction and
// k-means quantization into a palette of distinguishable colors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "hypso/color.hpp"
#include "hypso/error.hpp"
#include "hypso/random.hpp"
#include "hypso/raster_io.hpp"

namespace hypso {

struct ImageRaster {
  int width = 0;
  int height = 0;
  std::vector<RgbColor> pixels;  // row-major

  std::size_t size() const { return pixels.size(); }
  const RgbColor& at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

struct SaliencyMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major, each in [0, 1]
};

struct PaletteEntry {
  LabColor color;
  double proportion = 0.0;
};

struct QuantizedPalette {
  std::vector<PaletteEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

inline constexpr std::size_t kDefaultPixelCap = 512 * 512;

// Box-filter downsampling by the smallest integer factor that brings the
// pixel count under `cap`. Edge blocks average only the pixels they cover.
inline ImageRaster downsample_to_cap(const ImageRaster& img, std::size_t cap) {
  if (cap == 0) detail::fail(Errc::invalid_argument, "pixel cap must be positive");
  if (img.size() <= cap) return img;
  int f = std::max(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(img.size()) / cap))));
  auto out_dims = [&](int factor) {
    return std::pair{(img.width + factor - 1) / factor, (img.height + factor - 1) / factor};
  };
  while (true) {
    auto [w, h] = out_dims(f);
    if (static_cast<std::size_t>(w) * h <= cap) break;
    ++f;
  }
  auto [w, h] = out_dims(f);
  ImageRaster out{w, h, std::vector<RgbColor>(static_cast<std::size_t>(w) * h)};
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      unsigned sum[3] = {0, 0, 0};
      unsigned n = 0;
      for (int y = r * f; y < std::min(img.height, (r + 1) * f); ++y) {
        for (int x = c * f; x < std::min(img.width, (c + 1) * f); ++x) {
          const auto& p = img.at(y, x);
          sum[0] += p.r;
          sum[1] += p.g;
          sum[2] += p.b;
          ++n;
        }
      }
      auto avg = [&](unsigned s) { return static_cast<std::uint8_t>((s + n / 2) / n); };
      out.pixels[static_cast<std::size_t>(r) * w + c] = {avg(sum[0]), avg(sum[1]), avg(sum[2])};
    }
  }
  return out;
}

inline ImageRaster decode_image(const Bytes& data, std::size_t cap = kDefaultPixelCap) {
  Pixels8 px = decode_rgb8(data);
  ImageRaster img{px.width, px.height, {}};
  img.pixels.resize(static_cast<std::size_t>(px.width) * px.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = {px.data[3 * i], px.data[3 * i + 1], px.data[3 * i + 2]};
  return downsample_to_cap(img, cap);
}

inline ImageRaster load_image(const std::filesystem::path& path, std::size_t cap = kDefaultPixelCap) {
  return decode_image(read_file(path), cap);
}

// Lab conversion of every pixel, memoised per distinct RGB value.
inline std::vector<LabColor> to_lab(const ImageRaster& img) {
  std::vector<LabColor> out(img.size());
  std::vector<std::pair<std::uint32_t, std::size_t>> keyed(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto& p = img.pixels[i];
    keyed[i] = {(std::uint32_t{p.r} << 16) | (std::uint32_t{p.g} << 8) | p.b, i};
  }
  std::sort(keyed.begin(), keyed.end());
  std::uint32_t last = std::numeric_limits<std::uint32_t>::max();
  LabColor lab;
  for (const auto& [key, idx] : keyed) {
    if (key != last) {
      lab = srgb_to_lab(img.pixels[idx]);
      last = key;
    }
    out[idx] = lab;
  }
  return out;
}

class SaliencyEstimator {
 public:
  virtual ~SaliencyEstimator() = default;
  virtual SaliencyMap compute(const ImageRaster& img) const = 0;
};

// Contrast against the mean Lab color of a border band (background prior),
// normalised by the image maximum. A uniform image maps to all zeros.
class BorderContrastSaliency final : public SaliencyEstimator {
 public:
  explicit BorderContrastSaliency(double border_fraction = 0.1) : border_fraction_(border_fraction) {}

  SaliencyMap compute(const ImageRaster& img) const override {
    if (img.size() == 0) detail::fail(Errc::empty_input, "saliency of an empty image");
    const auto lab = to_lab(img);
    const int band = std::max(1, static_cast<int>(std::lround(border_fraction_ * std::min(img.width, img.height))));
    LabColor mean;
    std::size_t n = 0;
    for (int r = 0; r < img.height; ++r) {
      for (int c = 0; c < img.width; ++c) {
        if (r < band || c < band || r >= img.height - band || c >= img.width - band) {
          const auto& p = lab[static_cast<std::size_t>(r) * img.width + c];
          mean.L += p.L;
          mean.a += p.a;
          mean.b += p.b;
          ++n;
        }
      }
    }
    mean = {mean.L / n, mean.a / n, mean.b / n};

    SaliencyMap map{img.width, img.height, std::vector<double>(img.size())};
    double peak = 0.0;
    for (std::size_t i = 0; i < lab.size(); ++i) {
      map.values[i] = delta_e(lab[i], mean);
      peak = std::max(peak, map.values[i]);
    }
    for (auto& v : map.values) v = peak > 0.0 ? std::clamp(v / peak, 0.0, 1.0) : 0.0;
    return map;
  }

 private:
  double border_fraction_;
};

inline SaliencyMap compute_saliency(const ImageRaster& img, const SaliencyEstimator& estimator) {
  return estimator.compute(img);
}

inline SaliencyMap compute_saliency(const ImageRaster& img) {
  return compute_saliency(img, BorderContrastSaliency{});
}

inline constexpr double kDefaultSalientThreshold = 0.5;

// Lab colors of pixels whose saliency reaches `threshold`; all pixels when
// none do.
inline std::vector<LabColor> extract_salient_colors(const ImageRaster& img, const SaliencyMap& sal,
                                                    double threshold = kDefaultSalientThreshold) {
  if (sal.width != img.width || sal.height != img.height || sal.values.size() != img.size())
    detail::fail(Errc::dimension_mismatch, "saliency map does not match image");
  if (!(threshold >= 0.0 && threshold < 1.0)) detail::fail(Errc::invalid_argument, "threshold must be in [0, 1)");
  const auto lab = to_lab(img);
  std::vector<LabColor> out;
  for (std::size_t i = 0; i < lab.size(); ++i)
    if (sal.values[i] >= threshold) out.push_back(lab[i]);
  if (out.empty()) return lab;
  return out;
}

struct KMeansOptions {
  std::uint64_t seed = 1;
  int max_iterations = 100;
  double tolerance = 0.1;  // max centroid movement (ΔE) that ends the loop
};

inline constexpr int kDefaultPaletteSize = 64;

// Weighted k-means in Lab over the distinct input colors. Input order does
// not matter: colors are deduplicated and sorted before seeding.
inline QuantizedPalette quantize_colors(std::span<const LabColor> colors, int m, const KMeansOptions& opt = {}) {
  if (colors.empty()) detail::fail(Errc::empty_input, "no colors to quantize");
  if (m < 1) detail::fail(Errc::invalid_argument, "palette size must be at least 1");

  std::vector<LabColor> sorted(colors.begin(), colors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<LabColor> points;
  std::vector<double> weight;
  for (const auto& c : sorted) {
    if (points.empty() || !(points.back() == c)) {
      points.push_back(c);
      weight.push_back(1.0);
    } else {
      weight.back() += 1.0;
    }
  }
  const std::size_t n = points.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(m), n);

  auto dist2 = [](const LabColor& x, const LabColor& y) {
    const double dL = x.L - y.L, da = x.a - y.a, db = x.b - y.b;
    return dL * dL + da * da + db * db;
  };

  // k-means++ seeding.
  Rng rng(opt.seed);
  std::vector<LabColor> centers;
  centers.reserve(k);
  centers.push_back(points[weighted_pick(rng, weight)]);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = dist2(points[i], centers[0]);
  while (centers.size() < k) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = weight[i] * nearest[i];
    const std::size_t pick = weighted_pick(rng, w);
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist2(points[i], centers.back()));
  }

  std::vector<std::size_t> label(n, 0);
  auto assign = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double d = dist2(points[i], centers[j]);
        if (d < best) {
          best = d;
          label[i] = j;
        }
      }
    }
  };

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    assign();
    std::vector<LabColor> sum(k);
    std::vector<double> mass(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sum[label[i]];
      s.L += weight[i] * points[i].L;
      s.a += weight[i] * points[i].a;
      s.b += weight[i] * points[i].b;
      mass[label[i]] += weight[i];
    }
    double moved = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (mass[j] == 0.0) continue;
      const LabColor next{sum[j].L / mass[j], sum[j].a / mass[j], sum[j].b / mass[j]};
      moved = std::max(moved, delta_e(next, centers[j]));
      centers[j] = next;
    }
    if (moved < opt.tolerance) break;
  }
  assign();

  // Snap each centroid to its closest member color.
  std::vector<double> mass(k, 0.0);
  std::vector<std::size_t> snap(k, n);
  std::vector<double> snap_d(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = label[i];
    mass[j] += weight[i];
    const double d = dist2(points[i], centers[j]);
    if (d < snap_d[j]) {
      snap_d[j] = d;
      snap[j] = i;
    }
  }
  const double total = static_cast<double>(colors.size());
  QuantizedPalette out;
  for (std::size_t j = 0; j < k; ++j)
    if (mass[j] > 0.0) out.entries.push_back({points[snap[j]], mass[j] / total});
  std::sort(out.entries.begin(), out.entries.end(), [](const PaletteEntry& x, const PaletteEntry& y) {
    if (x.proportion != y.proportion) return x.proportion > y.proportion;
    return x.color < y.color;
  });
  return out;
}

}  // namespace hypso
