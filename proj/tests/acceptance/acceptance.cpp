// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances and time budgets are fixed here.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "../generators.hpp"

using namespace hypso;

namespace {

const std::string kFixtures = HYPSO_FIXTURES;

constexpr double kOracleTol = 1e-9;
constexpr double kOracleBudget = 10.0;
constexpr double kPaperRunBudget = 60.0;
constexpr double kParetoBudget = 30.0;
constexpr double kParetoCoverage = 0.90;
constexpr double kWhiteTol = 0.01;
constexpr int kRoundTripTol = 1;
constexpr double kTopologyBound = 0.7;
constexpr double kMassTol = 1e-9;
constexpr double kFlatShadeTol = 1e-12;
constexpr double kDeltaMin = 10.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) detail << "failed: " << what << "; ";
    pass = pass && cond;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void criterion(const char* name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << "exception: " << e.what() << "; ";
  }
  std::printf("%s %s (%.2fs) %s\n", o.pass ? "PASS" : "FAIL", name, seconds_since(t0), o.detail.str().c_str());
  std::fflush(stdout);
  failures += !o.pass;
}

void score_oracle(Outcome& o) {
  gen::Engine e(2024);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto inst = gen::score_instance(e);
    const auto r = score_scheme(inst.scheme, inst.conventions, inst.profile, inst.areas, inst.params);
    const auto x = gen::oracle_scores(inst);
    for (const auto& [got, want] : {std::pair{r.f_g, x.f_g}, {r.f_ap, x.f_ap}, {r.f_c, x.f_c}, {r.f_d, x.f_d},
                                    {r.F_s, x.F_s}, {r.F_a, x.F_a}})
      worst = std::max(worst, std::abs(got - want));
  }
  const double t = seconds_since(t0);
  o.require(worst <= kOracleTol, "max deviation within 1e-9");
  o.require(t < kOracleBudget, "runtime under 10 s");
  o.detail << "instances=100 max_dev=" << worst;
}

void paper_runs(Outcome& o) {
  struct Run {
    const char* image;
    const char* dem;
    int k;
  };
  const Run runs[] = {{"autumn.png", "ridge.asc", 3},   {"meadow.png", "mountain.png", 3}, {"sunset.jpg", "canyon.asc", 3},
                      {"autumn.png", "ridge.asc", 2},   {"sunset.jpg", "crater.asc", 2}};
  for (const auto& run : runs) {
    TransferConfig cfg;
    cfg.scoring.gamma = 10;
    cfg.scoring.alpha = 10;
    cfg.scoring.t = 1;
    cfg.scoring.k = run.k;
    cfg.zones = 9;
    cfg.mode = TintMode::graded;
    cfg.optimizer.delta_min = kDeltaMin;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_transfer(image_from_file(kFixtures + "/" + run.image), DemInput::from_file(kFixtures + "/" + run.dem), cfg);
    const double t = seconds_since(t0);
    const std::string tag = std::string(run.image) + "+" + run.dem + " k=" + std::to_string(run.k);
    o.require(r.dem.rows <= 512 && r.dem.cols <= 512, tag + " DEM within 512x512");
    for (const auto& c : r.archive.solutions) {
      const auto s = score_scheme(c.scheme, cfg.conventions, r.analysis.profile, r.areas, cfg.scoring);
      for (double v : {s.f_g, s.f_ap, s.f_c, s.f_d, s.harmony, s.F_s, s.F_a}) o.require(v >= 0.0 && v <= 1.0, tag + " scores in [0,1]");
    }
    o.require(discrimination_check(r.midpoint.scheme, kDeltaMin), tag + " midpoint passes delta_min=10");
    o.require(r.midpoint.feasible, tag + " midpoint feasible");
    o.require(t <= kPaperRunBudget, tag + " runtime within 60 s");
    o.detail << tag << ": front=" << r.archive.size() << " mid=(" << r.midpoint.F_s << "," << r.midpoint.F_a << ") " << t
             << "s; ";
  }
}

// Every bundled image against every ASCII DEM, at k = 3 and the dichromatic
// k = 2, five seeds each.
void pareto_oracle(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 1.0;
  std::size_t instances = 0, largest = 0;
  for (const char* image : {"autumn.png", "meadow.png", "sunset.jpg"}) {
    for (const char* dem : {"ridge.asc", "crater.asc", "canyon.asc"}) {
      for (int k : {2, 3}) {
        auto tiny = gen::tiny_from_fixtures(kFixtures + "/" + image, kFixtures + "/" + dem);
        tiny.params.k = k;
        const std::string tag = std::string(image) + "+" + dem + " k=" + std::to_string(k);
        o.require(tiny.grid.cells.size() == 16, tag + " 4x4 grid");
        const auto exact = gen::score_pairs(exhaustive_front(tiny.problem()));
        largest = std::max(largest, exact.size());
        ++instances;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
          OptimizerConfig cfg;
          cfg.seed = seed;
          cfg.archive_capacity = 0;
          const auto found = gen::score_pairs(optimize(tiny.problem(), cfg));
          std::size_t hit = 0;
          for (const auto& p : found) hit += exact.count(p);
          const double coverage = static_cast<double>(hit) / static_cast<double>(exact.size());
          o.require(hit == found.size(), tag + " archive is a subset of the exhaustive front (seed " + std::to_string(seed) + ")");
          o.require(coverage >= kParetoCoverage, tag + " coverage >= 90% (seed " + std::to_string(seed) + ")");
          worst = std::min(worst, coverage);
        }
      }
    }
  }
  const double t = seconds_since(t0);
  o.require(t < kParetoBudget, "runtime under 30 s");
  o.detail << "instances=" << instances << " seeds=5 largest_true_front=" << largest << " worst_coverage=" << worst;
}

void color_goldens(Outcome& o) {
  o.require(delta_e({50, 0, 0}, {50, 3, 4}) == 5.0, "dE((50,0,0),(50,3,4)) == 5");
  const auto white = srgb_to_lab({255, 255, 255});
  o.require(std::abs(white.L - 100) <= kWhiteTol && std::abs(white.a) <= kWhiteTol && std::abs(white.b) <= kWhiteTol,
            "white -> (100,0,0)");
  gen::Engine e(99);
  int worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto c = gen::rgb(e);
    const auto back = lab_to_srgb(srgb_to_lab(c));
    worst = std::max({worst, std::abs(back.r - c.r), std::abs(back.g - c.g), std::abs(back.b - c.b)});
  }
  o.require(worst <= kRoundTripTol, "round trip within 1 per channel");
  o.detail << "white=(" << white.L << "," << white.a << "," << white.b << ") round_trip_max=" << worst;
}

void continuity_gate(Outcome& o) {
  gen::Engine e(5);
  int checked = 0;
  for (int k = 1; k <= 3; ++k) {
    for (int trial = 0; trial < 50; ++trial) {
      ScoringParams p;
      p.k = k;
      const int n = gen::integer(e, k + 2, 12);
      std::vector<double> coef(4, 0.0);
      coef[1] = gen::real(e, 1, 4);
      for (int d = 2; d <= k; ++d) coef[static_cast<std::size_t>(d)] = gen::real(e, 0, 0.2 / (d * d));
      std::vector<LabColor> colors;
      for (int i = 1; i <= n; ++i) {
        double L = 5;
        for (int d = 1; d <= 3; ++d) L += coef[static_cast<std::size_t>(d)] * std::pow(i, d);
        colors.push_back({L, 0, 0});
      }
      const TintScheme s{colors, TintMode::graded};
      o.require(continuity_score(s, p) == 1.0, "t=+1 scores exactly 1 (k=" + std::to_string(k) + ")");
      p.t = -1;
      o.require(continuity_score(s, p) == 0.0, "t=-1 scores exactly 0 (k=" + std::to_string(k) + ")");
      ++checked;
    }
  }
  o.detail << "schemes=" << checked;
}

void aerial_formula(Outcome& o) {
  ScoringParams p;
  p.aerial_enabled = true;
  const TintScheme rising{{{10, 0, 0}, {15, 0, 0}, {25, 0, 0}, {45, 0, 0}}, TintMode::graded};
  const TintScheme falling{{{10, 0, 0}, {30, 0, 0}, {40, 0, 0}, {45, 0, 0}}, TintMode::graded};
  const double up = aerial_score(rising, p), down = aerial_score(falling, p);
  o.require(up == 1.0, "(5,10,20) -> 1");
  o.require(down == 0.0, "(20,10,5) -> 0");
  o.detail << "rising=" << up << " falling=" << down;
}

void som_topology(Outcome& o) {
  for (const char* name : {"autumn.png", "meadow.png", "sunset.jpg"}) {
    const auto a = analyze_image(image_from_file(kFixtures + "/" + name), AnalysisConfig{});
    const double ratio = topology_ratio(a.grid);
    o.require(ratio < kTopologyBound, std::string(name) + " topology ratio < 0.7");
    o.detail << name << "=" << ratio << " ";
  }
}

void conservation(Outcome& o) {
  gen::Engine e(314);
  double worst = 0.0;
  auto track = [&](double s) { worst = std::max(worst, std::abs(s - 1.0)); };
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<LabColor> colors;
    for (int i = 0, n = gen::integer(e, 1, 600); i < n; ++i) colors.push_back(i > 0 && gen::coin(e) ? colors[gen::integer(e, 0, i - 1)] : gen::lab(e));
    const auto palette = quantize_colors(colors, gen::integer(e, 1, 64));
    double s = 0;
    for (const auto& p : palette.entries) s += p.proportion;
    track(s);

    const auto grid = segment_regions(train_som(palette, gen::integer(e, 2, 10), 40, trial), 2.3, gen::integer(e, 2, 8));
    s = 0;
    for (const auto& r : grid.regions) s += r.proportion;
    track(s);
    s = 0;
    for (const auto& d : identify_dominants(grid).entries) s += d.proportion;
    track(s);

    const auto dem = gen::dem(e, gen::integer(e, 1, 50), gen::integer(e, 1, 50), gen::real(e, 0, 0.6));
    s = 0;
    for (double a : zone_areas(classify_zones(dem, gen::integer(e, 2, 12), gen::coin(e) ? ZoneMethod::quantile : ZoneMethod::equal_interval)).proportions) s += a;
    track(s);
    s = 0;
    for (const auto& m : ramp_mass(dem, gen::scheme(e, gen::integer(e, 2, 9), TintMode::continuous), gen::integer(e, 9, 100))) s += m.mass;
    track(s);
  }
  o.require(worst <= kMassTol, "all masses sum to 1 within 1e-9");
  o.detail << "trials=40 max_dev=" << worst;
}

void determinism(Outcome& o) {
  TransferConfig cfg;
  cfg.zones = 7;
  cfg.scoring.aerial_enabled = true;
  cfg.conventions.assignments[1] = {45, -30, 25};
  auto once = [&] {
    const auto r = run_transfer(image_from_file(kFixtures + "/meadow.png"), DemInput::from_file(kFixtures + "/crater.asc"), cfg);
    return std::tuple{r.manifest.dump(), pareto_to_json(r.archive).dump(), encode_render(render_scheme(r.dem, r.zones, r.midpoint.scheme, cfg))};
  };
  const auto [m1, a1, p1] = once();
  const auto [m2, a2, p2] = once();
  o.require(m1 == m2, "identical manifests");
  o.require(a1 == a2, "identical archives");
  o.require(p1 == p2, "identical PNG bytes");
  o.detail << "manifest_sha256=" << sha256_hex(m1).substr(0, 16) << " png_bytes=" << p1.size();
}

void flat_hillshade(Outcome& o) {
  const Dem flat{64, 64, 30.0, std::nullopt, std::vector<double>(64 * 64, 812.5)};
  double worst = 0.0;
  for (double alt : {15.0, 30.0, 45.0, 60.0, 75.0, 90.0}) {
    const double want = std::sin(alt * std::numbers::pi / 180.0);
    for (double v : hillshade(flat, default_azimuths(), alt).values) worst = std::max(worst, std::abs(v - want));
  }
  o.require(worst <= kFlatShadeTol, "flat shade equals sin(altitude) within 1e-12");
  o.detail << "max_dev=" << worst;
}

}  // namespace

int main() {
  criterion("score-formula-oracle-equivalence", score_oracle);
  criterion("paper-parameter-run", paper_runs);
  criterion("pareto-oracle", pareto_oracle);
  criterion("color-math-goldens", color_goldens);
  criterion("continuity-direction-gate", continuity_gate);
  criterion("aerial-formula", aerial_formula);
  criterion("som-topology", som_topology);
  criterion("conservation-suite", conservation);
  criterion("determinism", determinism);
  criterion("flat-dem-hillshade", flat_hillshade);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
