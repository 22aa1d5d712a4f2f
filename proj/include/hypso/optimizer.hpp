#pragma once

// Dual-objective search over grid-constrained tint schemes. Candidates pick
// one grid cell per elevation zone; an evolutionary loop with local
// (neighbourhood) and global (region jump) moves feeds a bounded Pareto
// archive over (F_s, F_a).

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "hypso/error.hpp"
#include "hypso/grid.hpp"
#include "hypso/harmony.hpp"
#include "hypso/random.hpp"
#include "hypso/scoring.hpp"

namespace hypso {

// Everything needed to score a candidate; references must outlive the problem.
struct TransferProblem {
  const ColorGrid& grid;
  int n_zones;
  TintMode mode;
  const DominantProfile& profile;
  const ZoneAreas& areas;
  const ConventionSpec& conventions;
  const ScoringParams& params;
  const HarmonyScorer& scorer = default_harmony_scorer();
  double delta_min = kDefaultDeltaMin;
};

struct Candidate {
  std::vector<GridCoord> coords;  // one per zone, low to high
  TintScheme scheme;
  double F_s = 0.0;
  double F_a = 0.0;
  bool feasible = true;  // false when a graded scheme fails the discrimination constraint
  int violations = 0;    // color pairs closer than delta_min (graded mode)
};

struct ParetoArchive {
  std::vector<Candidate> solutions;
  std::size_t capacity = 0;  // 0 = unbounded
  std::vector<std::string> notices;

  std::size_t size() const { return solutions.size(); }
  bool empty() const { return solutions.empty(); }
};

struct OptimizerConfig {
  int population = 40;
  int iterations = 500;
  double local_move_probability = 0.7;
  int local_radius = 1;
  std::uint64_t seed = 1;
  double delta_min = kDefaultDeltaMin;
  std::size_t archive_capacity = 64;

  void validate() const {
    if (population < 2) detail::fail(Errc::invalid_argument, "population must be at least 2");
    if (iterations < 0) detail::fail(Errc::invalid_argument, "iterations must be non-negative");
    if (!(local_move_probability >= 0.0 && local_move_probability <= 1.0))
      detail::fail(Errc::invalid_argument, "local move probability must be in [0, 1]");
    if (local_radius < 1) detail::fail(Errc::invalid_argument, "local radius must be at least 1");
    if (!(delta_min >= 0.0)) detail::fail(Errc::invalid_argument, "delta_min must be non-negative");
  }
};

inline bool dominates(const Candidate& x, const Candidate& y) {
  return x.F_s >= y.F_s && x.F_a >= y.F_a && (x.F_s > y.F_s || x.F_a > y.F_a);
}

inline Candidate make_candidate(const TransferProblem& problem, std::vector<GridCoord> coords) {
  if (coords.size() != static_cast<std::size_t>(problem.n_zones))
    detail::fail(Errc::dimension_mismatch, "candidate needs one coordinate per zone");
  Candidate c;
  c.scheme.mode = problem.mode;
  for (const auto& at : coords) {
    if (!problem.grid.in_bounds(at)) detail::fail(Errc::invalid_argument, "candidate coordinate outside the grid");
    c.scheme.colors.push_back(problem.grid.color(at));
  }
  c.coords = std::move(coords);
  return c;
}

// Sets F_s and F_a. Graded schemes violating the discrimination constraint
// score (0, 0) and are marked infeasible.
inline void evaluate(const TransferProblem& problem, Candidate& c) {
  c.violations = problem.mode == TintMode::graded ? discrimination_violations(c.scheme, problem.delta_min) : 0;
  c.feasible = c.violations == 0;
  if (!c.feasible) {
    c.F_s = 0.0;
    c.F_a = 0.0;
    return;
  }
  c.F_s = subjective_score(c.scheme, problem.conventions, problem.params);
  c.F_a = aesthetic_score(c.scheme, problem.profile, problem.areas, problem.params, problem.scorer);
}

namespace detail {

inline std::vector<std::size_t> front_order(const std::vector<Candidate>& s) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    if (s[x].F_s != s[y].F_s) return s[x].F_s < s[y].F_s;
    if (s[x].F_a != s[y].F_a) return s[x].F_a > s[y].F_a;
    return s[x].coords < s[y].coords;
  });
  return idx;
}

inline void evict_most_crowded(ParetoArchive& archive) {
  const auto& s = archive.solutions;
  const auto order = front_order(s);
  const double fs_range = s[order.back()].F_s - s[order.front()].F_s;
  const double fa_range = s[order.front()].F_a - s[order.back()].F_a;
  std::size_t victim = order.size();
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < order.size(); ++k) {
    double d = 0.0;
    if (fs_range > 0.0) d += (s[order[k + 1]].F_s - s[order[k - 1]].F_s) / fs_range;
    if (fa_range > 0.0) d += (s[order[k - 1]].F_a - s[order[k + 1]].F_a) / fa_range;
    if (d < smallest) {
      smallest = d;
      victim = order[k];
    }
  }
  if (victim == order.size()) victim = order.back();
  archive.solutions.erase(archive.solutions.begin() + static_cast<std::ptrdiff_t>(victim));
}

// Parent replacement. Between feasible candidates the mutant survives when it
// is at least as good on either objective; otherwise feasibility wins, and
// two infeasible candidates are compared by violation count so the search
// can climb out of the all-zero plateau.
inline bool mutant_survives(const Candidate& mutant, const Candidate& parent) {
  if (mutant.feasible && parent.feasible) return mutant.F_s >= parent.F_s || mutant.F_a >= parent.F_a;
  if (mutant.feasible != parent.feasible) return mutant.feasible;
  return mutant.violations <= parent.violations;
}

}  // namespace detail

// Offers an evaluated candidate to the archive; returns whether it was kept.
// Feasible candidates outrank infeasible ones, and a candidate whose score
// pair is already present is not added.
inline bool pareto_insert(ParetoArchive& archive, const Candidate& c) {
  auto& s = archive.solutions;
  const bool have_feasible = std::any_of(s.begin(), s.end(), [](const Candidate& x) { return x.feasible; });
  if (!c.feasible && have_feasible) return false;
  if (c.feasible) std::erase_if(s, [](const Candidate& x) { return !x.feasible; });
  for (const auto& m : s)
    if (dominates(m, c) || (m.F_s == c.F_s && m.F_a == c.F_a)) return false;
  std::erase_if(s, [&](const Candidate& m) { return dominates(c, m); });
  s.push_back(c);
  if (archive.capacity > 0 && s.size() > archive.capacity) detail::evict_most_crowded(archive);
  return true;
}

inline bool is_nondominated(const ParetoArchive& archive) {
  for (const auto& x : archive.solutions)
    for (const auto& y : archive.solutions)
      if (&x != &y && dominates(x, y)) return false;
  return true;
}

inline ParetoArchive optimize(const TransferProblem& problem, const OptimizerConfig& config) {
  config.validate();
  problem.params.validate();
  if (problem.n_zones < 2) detail::fail(Errc::invalid_argument, "at least two zones are required");
  const auto& grid = problem.grid;
  if (grid.cells.empty()) detail::fail(Errc::empty_input, "empty color grid");

  ParetoArchive archive;
  archive.capacity = config.archive_capacity;
  const bool global_moves = grid.regions.size() >= 2;
  if (!global_moves) {
    archive.notices.emplace_back("color grid has a single region; using local moves only");
    std::clog << "hypso: " << archive.notices.back() << '\n';
  }

  Rng rng(config.seed);
  const std::size_t n_cells = grid.cells.size();
  std::vector<Candidate> population;
  population.reserve(static_cast<std::size_t>(config.population));
  for (int p = 0; p < config.population; ++p) {
    std::vector<GridCoord> coords;
    for (int z = 0; z < problem.n_zones; ++z) coords.push_back(grid.coord(uniform_index(rng, n_cells)));
    Candidate c = make_candidate(problem, std::move(coords));
    evaluate(problem, c);
    pareto_insert(archive, c);
    population.push_back(std::move(c));
  }

  for (int it = 0; it < config.iterations; ++it) {
    for (auto& parent : population) {
      std::vector<GridCoord> coords = parent.coords;
      const std::size_t z = uniform_index(rng, coords.size());
      const bool local = !global_moves || uniform01(rng) < config.local_move_probability;
      if (local) {
        const auto near = neighbors(grid, coords[z], config.local_radius);
        if (!near.empty()) coords[z] = near[uniform_index(rng, near.size())];
      } else {
        coords[z] = region_jump(grid, coords[z], rng);
      }
      Candidate mutant = make_candidate(problem, std::move(coords));
      evaluate(problem, mutant);
      pareto_insert(archive, mutant);
      if (detail::mutant_survives(mutant, parent)) parent = std::move(mutant);
    }
  }
  return archive;
}

// Members sorted by F_s ascending, ties by F_a descending.
inline std::vector<Candidate> sorted_front(const ParetoArchive& archive) {
  std::vector<Candidate> out;
  for (std::size_t i : detail::front_order(archive.solutions)) out.push_back(archive.solutions[i]);
  return out;
}

inline std::size_t midpoint_index(std::size_t count) { return (count - 1) / 2; }

inline Candidate select_midpoint(const ParetoArchive& archive) {
  if (archive.empty()) detail::fail(Errc::empty_input, "empty Pareto archive");
  const auto front = sorted_front(archive);
  return front[midpoint_index(front.size())];
}

// Evenly spaced picks along the sorted front, extremes included.
inline std::vector<Candidate> sample_front(const ParetoArchive& archive, std::size_t count) {
  if (archive.empty()) detail::fail(Errc::empty_input, "empty Pareto archive");
  if (count < 1) detail::fail(Errc::invalid_argument, "sample count must be at least 1");
  auto front = sorted_front(archive);
  if (count >= front.size()) return front;
  if (count == 1) return {front[midpoint_index(front.size())]};
  std::vector<Candidate> out;
  const double step = static_cast<double>(front.size() - 1) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out.push_back(front[static_cast<std::size_t>(std::lround(i * step))]);
  return out;
}

inline constexpr std::uint64_t kExhaustiveLimit = 1'000'000;

// Exact front by enumerating every assignment of cells to zones.
inline ParetoArchive exhaustive_front(const TransferProblem& problem) {
  problem.params.validate();
  if (problem.n_zones < 2) detail::fail(Errc::invalid_argument, "at least two zones are required");
  const std::uint64_t cells = problem.grid.cells.size();
  if (cells == 0) detail::fail(Errc::empty_input, "empty color grid");
  std::uint64_t total = 1;
  for (int z = 0; z < problem.n_zones; ++z) {
    if (total > kExhaustiveLimit / cells) detail::fail(Errc::instance_too_large, "instance exceeds 10^6 assignments");
    total *= cells;
  }
  ParetoArchive archive;
  std::vector<std::size_t> digits(static_cast<std::size_t>(problem.n_zones), 0);
  for (std::uint64_t k = 0; k < total; ++k) {
    std::vector<GridCoord> coords;
    for (std::size_t d : digits) coords.push_back(problem.grid.coord(d));
    Candidate c = make_candidate(problem, std::move(coords));
    evaluate(problem, c);
    pareto_insert(archive, c);
    for (std::size_t z = digits.size(); z-- > 0;) {
      if (++digits[z] < cells) break;
      digits[z] = 0;
    }
  }
  return archive;
}

}  // namespace hypso
