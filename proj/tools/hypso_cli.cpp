// hypso: command-line front end for image-to-terrain color transfer.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hypso/hypso.hpp"

namespace fs = std::filesystem;
using namespace hypso;

namespace {

struct Flags {
  std::string params_file;
  std::optional<std::string> mode;
  std::optional<int> zones;
  std::optional<std::string> zone_method;
  std::optional<int> k;
  std::optional<int> t;
  std::optional<double> gamma;
  std::optional<double> alpha;
  bool aerial = false;
  bool no_shade = false;
  std::vector<std::string> conventions;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_size;
  std::optional<double> delta_min;
  std::optional<int> iterations;
  std::optional<int> population;
};

void add_scheme_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--params", f.params_file, "JSON parameter object, or a run manifest to replay")->check(CLI::ExistingFile);
  cmd->add_option("--mode", f.mode, "graded | continuous")->check(CLI::IsMember({"graded", "continuous"}));
  cmd->add_option("--zones", f.zones, "number of elevation zones")->check(CLI::Range(2, 64));
  cmd->add_option("--zone-method", f.zone_method, "equal_interval | quantile")
      ->check(CLI::IsMember({"equal_interval", "quantile"}));
  cmd->add_option("--k", f.k, "continuity polynomial degree")->check(CLI::IsMember({1, 2, 3}));
  cmd->add_option("--t", f.t, "+1: lighter with elevation, -1: darker")->check(CLI::IsMember({1, -1}));
  cmd->add_option("--gamma", f.gamma, "convention ΔE threshold")->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", f.alpha, "similarity ΔE threshold")->check(CLI::PositiveNumber);
  cmd->add_flag("--aerial", f.aerial, "enable the aerial-perspective term");
  cmd->add_option("--convention", f.conventions, "ZONE=L,a,b (1-based zone, repeatable)");
  cmd->add_option("--seed", f.seed, "analysis and optimizer seed");
  cmd->add_option("--grid-size", f.grid_size, "color grid side")->check(CLI::Range(2, 64));
  cmd->add_option("--delta-min", f.delta_min, "graded discrimination threshold (ΔE)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--iterations", f.iterations, "optimizer iterations")->check(CLI::NonNegativeNumber);
  cmd->add_option("--population", f.population, "optimizer population")->check(CLI::Range(2, 100000));
  cmd->add_flag("--no-shade", f.no_shade, "render flat tints without hillshade");
}

LabColor parse_lab(const std::string& text) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    try {
      std::size_t used = 0;
      const std::string part = text.substr(pos, comma - pos);
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--convention", "expected ZONE=L,a,b, got '" + text + "'");
    }
    pos = comma + 1;
  }
  if (v.size() != 3) throw CLI::ValidationError("--convention", "expected three Lab components in '" + text + "'");
  return {v[0], v[1], v[2]};
}

TransferConfig build_config(const Flags& f) {
  TransferConfig c;
  if (!f.params_file.empty()) {
    const auto bytes = read_file(f.params_file);
    const Json j = Json::parse(bytes.begin(), bytes.end());
    c = j.is_object() && j.contains("schema") ? config_from_manifest(j) : config_from_json(j);
  }
  if (f.mode) c.mode = tint_mode_from_string(*f.mode);
  if (f.zones) c.zones = *f.zones;
  if (f.zone_method) c.zone_method = zone_method_from_string(*f.zone_method);
  if (f.k) c.scoring.k = *f.k;
  if (f.t) c.scoring.t = *f.t;
  if (f.gamma) c.scoring.gamma = *f.gamma;
  if (f.alpha) c.scoring.alpha = *f.alpha;
  if (f.aerial) c.scoring.aerial_enabled = true;
  if (f.no_shade) c.shade = false;
  if (f.seed) c.analysis.seed = c.optimizer.seed = *f.seed;
  if (f.grid_size) c.analysis.grid_size = *f.grid_size;
  if (f.delta_min) c.optimizer.delta_min = *f.delta_min;
  if (f.iterations) c.optimizer.iterations = *f.iterations;
  if (f.population) c.optimizer.population = *f.population;
  for (const auto& spec : f.conventions) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--convention", "expected ZONE=L,a,b, got '" + spec + "'");
    int zone = 0;
    try {
      zone = std::stoi(spec.substr(0, eq));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--convention", "bad zone in '" + spec + "'");
    }
    c.conventions.assignments[zone] = parse_lab(spec.substr(eq + 1));
  }
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, Bytes(text.begin(), text.end()));
  std::cout << path.string() << '\n';
}

void write_bytes(const fs::path& path, const Bytes& bytes) {
  write_file(path, bytes);
  std::cout << path.string() << '\n';
}

int cmd_analyze(const std::string& image, const Flags& f, const fs::path& out) {
  const TransferConfig cfg = build_config(f);
  validate(cfg);
  const auto a = analyze_image(image_from_file(image), cfg.analysis);
  fs::create_directories(out);
  write_text(out / "grid.json", grid_to_json(a.grid, a.profile).dump(2));
  std::vector<LabColor> dominants;
  for (const auto& d : a.profile.entries) dominants.push_back(d.color);
  write_bytes(out / "palette_strip.png", encode_png(tint_strip(dominants, false)));
  return 0;
}

int cmd_transfer(const std::string& image, const std::string& dem, const Flags& f, const fs::path& out) {
  const TransferConfig cfg = build_config(f);
  const auto r = run_transfer(image_from_file(image), DemInput::from_file(dem), cfg);
  for (const auto& n : r.archive.notices) std::cerr << "notice: " << n << '\n';
  fs::create_directories(out);
  write_bytes(out / "render.png", encode_render(render_scheme(r.dem, r.zones, r.midpoint.scheme, cfg)));
  write_bytes(out / "tint_strip.png", encode_png(tint_strip(r.midpoint.scheme.colors, cfg.mode == TintMode::continuous)));
  write_text(out / "pareto.json", pareto_to_json(r.archive).dump(2));
  write_text(out / "manifest.json", r.manifest.dump());
  std::cerr << "midpoint F_s=" << r.midpoint.F_s << " F_a=" << r.midpoint.F_a << " (front of " << r.archive.size()
            << ")\n";
  return 0;
}

int cmd_render(const std::string& solution, const std::string& dem_path, const Flags& f, const fs::path& out,
               std::optional<int> width) {
  TransferConfig cfg = build_config(f);
  const auto bytes = read_file(solution);
  const Candidate c = solution_from_json(Json::parse(bytes.begin(), bytes.end()));
  if (c.scheme.mode == TintMode::graded) cfg.zones = static_cast<int>(c.scheme.size());
  const Dem dem = load_dem(dem_path);
  const ZoneMap zm = classify_zones(dem, cfg.zones, cfg.zone_method);
  Pixels8 px = to_pixels(render_scheme(dem, zm, c.scheme, cfg));
  if (width) px = resize_to_width(px, *width);
  write_bytes(out, encode_png(px));
  return 0;
}

// Tiny-instance config: flat parameters plus "image" (and optional "dem")
// paths relative to the config file. Prints the exhaustive front as JSON.
int cmd_oracle(const std::string& config_path, const fs::path& out) {
  const auto bytes = read_file(config_path);
  Json j = Json::parse(bytes.begin(), bytes.end());
  const fs::path base = fs::path(config_path).parent_path();
  const std::string image = j.at("image").get<std::string>();
  std::optional<std::string> dem;
  if (j.contains("dem")) dem = j.at("dem").get<std::string>();
  j.erase("image");
  j.erase("dem");
  TransferConfig cfg = config_from_json(j);
  validate(cfg);
  const auto a = analyze_image(image_from_file(base / image), cfg.analysis);
  ZoneAreas areas;
  if (dem) {
    const Dem d = load_dem(base / *dem);
    areas = cfg.mode == TintMode::graded ? zone_areas(classify_zones(d, cfg.zones, cfg.zone_method))
                                         : elevation_slivers(d, cfg.scoring.ramp_samples);
  } else {
    const int len = cfg.mode == TintMode::graded ? cfg.zones : cfg.scoring.ramp_samples;
    areas.proportions.assign(static_cast<std::size_t>(len), 1.0 / len);
  }
  const auto scorer = HarmonyRegistry::instance().make(cfg.harmony);
  const TransferProblem problem{a.grid, cfg.zones, cfg.mode, a.profile, areas, cfg.conventions,
                                cfg.scoring, *scorer, cfg.optimizer.delta_min};
  const std::string text = pareto_to_json(exhaustive_front(problem)).dump(2);
  if (out.empty())
    std::cout << text << '\n';
  else
    write_text(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-to-terrain color transfer for hypsometric tints"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Flags flags;
  std::string image, dem, solution, config;
  fs::path out_dir = ".", out_file;
  std::optional<int> width;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir, persist_dir;

  auto* analyze = app.add_subcommand("analyze", "organize an image's colors into a grid; writes grid.json, palette_strip.png");
  analyze->add_option("image", image, "reference image (PNG or JPEG)")->required()->check(CLI::ExistingFile);
  analyze->add_option("-o,--out", out_dir, "output directory");
  analyze->add_option("--seed", flags.seed, "analysis seed");
  analyze->add_option("--grid-size", flags.grid_size, "color grid side")->check(CLI::Range(2, 64));
  analyze->add_option("--params", flags.params_file, "JSON parameter object")->check(CLI::ExistingFile);

  auto* transfer = app.add_subcommand("transfer", "transfer image colors to a DEM; writes render.png, tint_strip.png, "
                                                  "pareto.json, manifest.json");
  transfer->add_option("image", image, "reference image (PNG or JPEG)")->required()->check(CLI::ExistingFile);
  transfer->add_option("dem", dem, "DEM (.asc, or 16-bit .png with a .json sidecar)")->required()->check(CLI::ExistingFile);
  transfer->add_option("-o,--out", out_dir, "output directory");
  add_scheme_flags(transfer, flags);

  auto* render = app.add_subcommand("render", "render a saved solution over a DEM");
  render->add_option("solution", solution, "solution JSON")->required()->check(CLI::ExistingFile);
  render->add_option("dem", dem, "DEM")->required()->check(CLI::ExistingFile);
  render->add_option("-o,--out", out_file, "output PNG")->required();
  render->add_option("--width", width, "output width in pixels")->check(CLI::Range(1, 4096));
  add_scheme_flags(render, flags);

  auto* oracle = app.add_subcommand("oracle", "exhaustive Pareto front of a tiny instance");
  oracle->add_option("config", config, "tiny-instance JSON")->required()->check(CLI::ExistingFile);
  oracle->add_option("-o,--out", out_file, "output JSON (default: stdout)");

  auto* serve = app.add_subcommand("serve", "run the HTTP JSON service");
  serve->add_option("--port", port, "port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "bind address");
  serve->add_option("--static", static_dir, "directory served at /")->check(CLI::ExistingDirectory);
  serve->add_option("--persist", persist_dir, "directory for job manifests and results");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return 2;
  }

  try {
    if (*analyze) return cmd_analyze(image, flags, out_dir);
    if (*transfer) return cmd_transfer(image, dem, flags, out_dir);
    if (*render) return cmd_render(solution, dem, flags, out_file, width);
    if (*oracle) return cmd_oracle(config, out_file);
    if (*serve) {
      ServiceOptions opt;
      if (!static_dir.empty()) opt.static_dir = static_dir;
      if (!persist_dir.empty()) opt.persist_dir = persist_dir;
      Service service(std::move(opt));
      std::cerr << "listening on http://" << host << ':' << port << '\n';
      service.listen(host, port);
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
