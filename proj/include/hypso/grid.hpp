#pragma once

// The color grid: a w×w self-organizing map over the quantized palette,
// segmented into regions whose medoid colors are the image's dominant colors.
// Also hosts the local/global search moves and Lab interpolation used by the
// optimizer and the renderer.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "hypso/color.hpp"
#include "hypso/error.hpp"
#include "hypso/image.hpp"
#include "hypso/random.hpp"

namespace hypso {

struct GridCoord {
  int row = 0;
  int col = 0;

  friend constexpr bool operator==(const GridCoord&, const GridCoord&) = default;
  friend constexpr auto operator<=>(const GridCoord&, const GridCoord&) = default;
};

struct GridCell {
  LabColor color;
  int region = -1;
  int palette_index = -1;
};

struct Region {
  int id = 0;
  std::vector<GridCoord> members;
  LabColor dominant;
  GridCoord dominant_cell;
  double proportion = 0.0;
};

struct DominantEntry {
  LabColor color;
  double proportion = 0.0;
};

struct DominantProfile {
  std::vector<DominantEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

struct ColorGrid {
  int w = 0;
  std::vector<GridCell> cells;        // row-major, w*w
  std::vector<Region> regions;        // empty until segmented
  std::vector<PaletteEntry> palette;  // source colors of the cells

  std::size_t cell_count() const { return cells.size(); }
  bool in_bounds(GridCoord c) const { return c.row >= 0 && c.col >= 0 && c.row < w && c.col < w; }
  std::size_t index(GridCoord c) const { return static_cast<std::size_t>(c.row) * w + c.col; }
  GridCoord coord(std::size_t i) const { return {static_cast<int>(i / w), static_cast<int>(i % w)}; }
  const GridCell& at(GridCoord c) const { return cells[index(c)]; }
  GridCell& at(GridCoord c) { return cells[index(c)]; }
  const LabColor& color(GridCoord c) const { return at(c).color; }
  bool segmented() const { return !regions.empty(); }
};

// Grid built from explicit cell colors (row-major). The palette is the set of
// distinct colors weighted by how many cells carry them.
inline ColorGrid make_grid(int w, std::span<const LabColor> colors) {
  if (w < 1 || colors.size() != static_cast<std::size_t>(w) * w)
    detail::fail(Errc::dimension_mismatch, "grid needs w*w colors");
  ColorGrid grid;
  grid.w = w;
  grid.cells.resize(colors.size());
  for (std::size_t i = 0; i < colors.size(); ++i) {
    auto it = std::find_if(grid.palette.begin(), grid.palette.end(),
                           [&](const PaletteEntry& e) { return e.color == colors[i]; });
    if (it == grid.palette.end()) {
      grid.palette.push_back({colors[i], 0.0});
      it = grid.palette.end() - 1;
    }
    it->proportion += 1.0 / static_cast<double>(colors.size());
    grid.cells[i] = {colors[i], -1, static_cast<int>(it - grid.palette.begin())};
  }
  return grid;
}

struct SomSchedule {
  int epochs = 200;
  double learning_rate_start = 0.5;
  double learning_rate_end = 0.01;
  double sigma_start = -1.0;  // <= 0 means w / 2
  double sigma_end = 0.5;
};

inline constexpr int kDefaultGridSide = 16;

namespace detail {

inline std::size_t closest_palette_index(std::span<const PaletteEntry> palette, const LabColor& c) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < palette.size(); ++i) {
    const double d = delta_e(palette[i].color, c);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

// Kohonen training in Lab with a Gaussian neighbourhood, followed by a
// winner-takes-all pass that sets every node to its closest palette color.
// Nodes start on the plane of the palette's two principal axes.
inline ColorGrid train_som(const QuantizedPalette& palette, int w, const SomSchedule& schedule, std::uint64_t seed) {
  if (palette.empty()) detail::fail(Errc::empty_input, "SOM needs a non-empty palette");
  if (w < 2) detail::fail(Errc::invalid_argument, "grid side must be at least 2");
  if (schedule.epochs < 1) detail::fail(Errc::invalid_argument, "SOM needs at least one epoch");

  const auto& entries = palette.entries;
  const std::size_t m = entries.size();

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& e : entries) mean += Eigen::Vector3d(e.color.L, e.color.a, e.color.b);
  mean /= static_cast<double>(m);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& e : entries) {
    const Eigen::Vector3d d = Eigen::Vector3d(e.color.L, e.color.a, e.color.b) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(m);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  // Eigenvalues ascend; columns 2 and 1 are the principal axes.
  const Eigen::Vector3d ax0 = eig.eigenvectors().col(2) * std::sqrt(std::max(0.0, eig.eigenvalues()(2)));
  const Eigen::Vector3d ax1 = eig.eigenvectors().col(1) * std::sqrt(std::max(0.0, eig.eigenvalues()(1)));

  const std::size_t nodes = static_cast<std::size_t>(w) * w;
  std::vector<Eigen::Vector3d> weight(nodes);
  for (int r = 0; r < w; ++r) {
    for (int c = 0; c < w; ++c) {
      const double u = 2.0 * r / (w - 1) - 1.0;
      const double v = 2.0 * c / (w - 1) - 1.0;
      weight[static_cast<std::size_t>(r) * w + c] = mean + 2.0 * (u * ax0 + v * ax1);
    }
  }

  std::vector<Eigen::Vector3d> samples;
  samples.reserve(m);
  for (const auto& e : entries) samples.emplace_back(e.color.L, e.color.a, e.color.b);

  const double sigma0 = schedule.sigma_start > 0.0 ? schedule.sigma_start : w / 2.0;
  const double total_steps = static_cast<double>(schedule.epochs) * m;
  Rng rng(seed);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    for (std::size_t i = m; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    for (std::size_t s : order) {
      const double frac = total_steps > 1 ? step / (total_steps - 1) : 1.0;
      const double lr = schedule.learning_rate_start *
                        std::pow(schedule.learning_rate_end / schedule.learning_rate_start, frac);
      const double sigma = sigma0 * std::pow(schedule.sigma_end / sigma0, frac);
      ++step;

      std::size_t bmu = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t n = 0; n < nodes; ++n) {
        const double d = (weight[n] - samples[s]).squaredNorm();
        if (d < best) {
          best = d;
          bmu = n;
        }
      }
      const int br = static_cast<int>(bmu / w), bc = static_cast<int>(bmu % w);
      const double inv = 1.0 / (2.0 * sigma * sigma);
      for (std::size_t n = 0; n < nodes; ++n) {
        const int dr = static_cast<int>(n / w) - br, dc = static_cast<int>(n % w) - bc;
        const double h = std::exp(-(dr * dr + dc * dc) * inv);
        if (h < 1e-6) continue;
        weight[n] += lr * h * (samples[s] - weight[n]);
      }
    }
  }

  ColorGrid grid;
  grid.w = w;
  grid.palette = entries;
  grid.cells.resize(nodes);
  for (std::size_t n = 0; n < nodes; ++n) {
    const LabColor c{weight[n](0), weight[n](1), weight[n](2)};
    const std::size_t p = detail::closest_palette_index(entries, c);
    grid.cells[n] = {entries[p].color, -1, static_cast<int>(p)};
  }
  return grid;
}

inline ColorGrid train_som(const QuantizedPalette& palette, int w, int epochs, std::uint64_t seed) {
  SomSchedule schedule;
  schedule.epochs = epochs;
  return train_som(palette, w, schedule, seed);
}

// Mean ΔE over 4-adjacent cell pairs divided by mean ΔE over all cell pairs.
inline double topology_ratio(const ColorGrid& grid) {
  double adj = 0.0, all = 0.0;
  std::size_t n_adj = 0, n_all = 0;
  for (int r = 0; r < grid.w; ++r) {
    for (int c = 0; c < grid.w; ++c) {
      const auto& x = grid.color({r, c});
      if (c + 1 < grid.w) adj += delta_e(x, grid.color({r, c + 1})), ++n_adj;
      if (r + 1 < grid.w) adj += delta_e(x, grid.color({r + 1, c})), ++n_adj;
    }
  }
  for (std::size_t i = 0; i < grid.cells.size(); ++i)
    for (std::size_t j = i + 1; j < grid.cells.size(); ++j) all += delta_e(grid.cells[i].color, grid.cells[j].color), ++n_all;
  if (n_all == 0 || all == 0.0) return 0.0;
  return (adj / n_adj) / (all / n_all);
}

inline constexpr double kDefaultJncd = 2.3;
inline constexpr int kDefaultMaxDominants = 6;

namespace detail {

// Medoid colors and palette mass per region. Each palette entry is credited
// to the region of its closest cell so that region proportions conserve the
// palette's total mass even when some entries never won a node.
inline void fill_region_stats(ColorGrid& grid) {
  for (auto& region : grid.regions) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cand : region.members) {
      double sum = 0.0;
      for (const auto& other : region.members) sum += delta_e(grid.color(cand), grid.color(other));
      if (sum < best) {  // members are in row-major order: ties keep the first
        best = sum;
        region.dominant_cell = cand;
      }
    }
    region.dominant = grid.color(region.dominant_cell);
    region.proportion = 0.0;
  }
  for (const auto& entry : grid.palette) {
    std::size_t best_cell = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
      const double d = delta_e(entry.color, grid.cells[i].color);
      if (d < best_d) {
        best_d = d;
        best_cell = i;
      }
    }
    grid.regions[static_cast<std::size_t>(grid.cells[best_cell].region)].proportion += entry.proportion;
  }
}

}  // namespace detail

// Bottom-up average-linkage clustering of the cells: merge while the closest
// pair's linkage is within the threshold, doubling the threshold until at most
// `n_max` regions remain. Merge ties go to the lowest cluster ids.
inline ColorGrid segment_regions(ColorGrid grid, double jncd = kDefaultJncd, int n_max = kDefaultMaxDominants) {
  if (!(jncd > 0.0)) detail::fail(Errc::invalid_argument, "JNCD threshold must be positive");
  if (n_max < 2) detail::fail(Errc::invalid_argument, "n_max must be at least 2");
  const std::size_t n = grid.cells.size();
  if (n == 0) detail::fail(Errc::empty_input, "empty grid");

  std::vector<double> link(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      link[i * n + j] = link[j * n + i] = delta_e(grid.cells[i].color, grid.cells[j].color);
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> alive(n, true);
  std::vector<std::size_t> owner(n);
  std::iota(owner.begin(), owner.end(), 0);
  std::size_t count = n;

  double threshold = jncd;
  while (true) {
    while (count > 1) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t bi = 0, bj = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!alive[i]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
          if (alive[j] && link[i * n + j] < best) {
            best = link[i * n + j];
            bi = i;
            bj = j;
          }
        }
      }
      if (best > threshold) break;
      // Lance-Williams update for average linkage.
      for (std::size_t k = 0; k < n; ++k) {
        if (!alive[k] || k == bi || k == bj) continue;
        const double d = (size[bi] * link[bi * n + k] + size[bj] * link[bj * n + k]) /
                         static_cast<double>(size[bi] + size[bj]);
        link[bi * n + k] = link[k * n + bi] = d;
      }
      size[bi] += size[bj];
      alive[bj] = false;
      for (auto& o : owner)
        if (o == bj) o = bi;
      --count;
    }
    if (count <= static_cast<std::size_t>(n_max)) break;
    threshold *= 2.0;
  }

  std::vector<int> relabel(n, -1);
  grid.regions.clear();
  for (std::size_t i = 0; i < n; ++i) {
    int& id = relabel[owner[i]];
    if (id < 0) {
      id = static_cast<int>(grid.regions.size());
      grid.regions.push_back(Region{id, {}, {}, {}, 0.0});
    }
    grid.cells[i].region = id;
    grid.regions[static_cast<std::size_t>(id)].members.push_back(grid.coord(i));
  }
  detail::fill_region_stats(grid);
  return grid;
}

inline DominantProfile identify_dominants(const ColorGrid& grid) {
  if (!grid.segmented()) detail::fail(Errc::invalid_argument, "grid has not been segmented");
  ColorGrid copy = grid;
  detail::fill_region_stats(copy);
  DominantProfile profile;
  for (const auto& r : copy.regions) profile.entries.push_back({r.dominant, r.proportion});
  return profile;
}

// Cells within Chebyshev distance `radius`, excluding `at`, row-major order.
inline std::vector<GridCoord> neighbors(const ColorGrid& grid, GridCoord at, int radius) {
  if (!grid.in_bounds(at)) detail::fail(Errc::invalid_argument, "coordinate out of bounds");
  if (radius < 1) detail::fail(Errc::invalid_argument, "radius must be at least 1");
  std::vector<GridCoord> out;
  for (int r = std::max(0, at.row - radius); r <= std::min(grid.w - 1, at.row + radius); ++r)
    for (int c = std::max(0, at.col - radius); c <= std::min(grid.w - 1, at.col + radius); ++c)
      if (r != at.row || c != at.col) out.push_back({r, c});
  return out;
}

inline std::size_t region_count(const ColorGrid& grid) { return grid.regions.size(); }

// A uniformly random cell from any region other than the one holding `from`.
inline GridCoord region_jump(const ColorGrid& grid, GridCoord from, Rng& rng) {
  if (!grid.in_bounds(from)) detail::fail(Errc::invalid_argument, "coordinate out of bounds");
  if (grid.regions.size() < 2) detail::fail(Errc::no_global_move, "grid has a single region");
  const int home = grid.at(from).region;
  const std::size_t foreign = grid.cells.size() - grid.regions[static_cast<std::size_t>(home)].members.size();
  std::size_t pick = uniform_index(rng, foreign);
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    if (grid.cells[i].region == home) continue;
    if (pick-- == 0) return grid.coord(i);
  }
  return from;  // unreachable
}

// Linear Lab interpolation with both endpoints included exactly.
inline std::vector<LabColor> interpolate_path(const LabColor& start, const LabColor& end, int steps) {
  if (steps < 2) detail::fail(Errc::invalid_argument, "interpolation needs at least two steps");
  std::vector<LabColor> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) out[static_cast<std::size_t>(i)] = lerp(start, end, static_cast<double>(i) / (steps - 1));
  out.front() = start;
  out.back() = end;
  return out;
}

// Piecewise paths through consecutive anchors; shared anchors appear once.
inline std::vector<LabColor> interpolate_chain(std::span<const LabColor> anchors, int steps_per_segment) {
  if (anchors.size() < 2) detail::fail(Errc::invalid_argument, "chain needs at least two anchors");
  std::vector<LabColor> out;
  for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
    auto seg = interpolate_path(anchors[i], anchors[i + 1], steps_per_segment);
    out.insert(out.end(), seg.begin() + (i == 0 ? 0 : 1), seg.end());
  }
  return out;
}

// Color at u in [0, 1] on the piecewise-linear ramp through `anchors`, which
// sit at u = i / (n - 1).
inline LabColor ramp_color(std::span<const LabColor> anchors, double u) {
  if (anchors.empty()) detail::fail(Errc::invalid_argument, "ramp needs anchors");
  if (anchors.size() == 1) return anchors[0];
  const double pos = std::clamp(u, 0.0, 1.0) * static_cast<double>(anchors.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(pos), anchors.size() - 2);
  const double t = pos - static_cast<double>(i);
  if (t <= 0.0) return anchors[i];
  if (t >= 1.0) return anchors[i + 1];
  return lerp(anchors[i], anchors[i + 1], t);
}

}  // namespace hypso
