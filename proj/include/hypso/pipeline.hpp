#pragma once

// End-to-end transfer: reference image -> color grid -> Pareto search over
// tint schemes for a DEM, plus the run manifest that reproduces it.

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "hypso/grid.hpp"
#include "hypso/harmony.hpp"
#include "hypso/image.hpp"
#include "hypso/optimizer.hpp"
#include "hypso/scoring.hpp"
#include "hypso/serialize.hpp"
#include "hypso/terrain.hpp"
#include "hypso/version.hpp"

namespace hypso {

inline std::string sha256_hex(const void* data, std::size_t size) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data, size, md, &len, EVP_sha256(), nullptr)) detail::fail(Errc::io_error, "sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

inline std::string sha256_hex(const Bytes& data) { return sha256_hex(data.data(), data.size()); }
inline std::string sha256_hex(std::string_view s) { return sha256_hex(s.data(), s.size()); }

struct AnalysisConfig {
  std::size_t pixel_cap = kDefaultPixelCap;
  double salient_threshold = kDefaultSalientThreshold;
  int palette_size = kDefaultPaletteSize;
  int grid_size = kDefaultGridSide;
  int som_epochs = 200;
  double jncd = kDefaultJncd;
  int max_dominants = kDefaultMaxDominants;
  std::uint64_t seed = 7;
};

struct TransferConfig {
  AnalysisConfig analysis;
  ScoringParams scoring;
  ConventionSpec conventions;
  OptimizerConfig optimizer;
  TintMode mode = TintMode::graded;
  int zones = kDefaultZones;
  ZoneMethod zone_method = ZoneMethod::equal_interval;
  std::string harmony = "matsuda-template";
  bool shade = true;
};

// Flat parameter object shared by the CLI, the manifest and POST /api/jobs.
inline Json config_to_json(const TransferConfig& c) {
  Json conventions = Json::array();
  for (const auto& [zone, col] : c.conventions.assignments)
    conventions.push_back({{"zone", zone}, {"L", col.L}, {"a", col.a}, {"b", col.b}});
  return {
      {"mode", to_string(c.mode)},
      {"zones", c.zones},
      {"zone_method", to_string(c.zone_method)},
      {"k", c.scoring.k},
      {"t", c.scoring.t},
      {"gamma", c.scoring.gamma},
      {"alpha", c.scoring.alpha},
      {"aerial", c.scoring.aerial_enabled},
      {"ramp_samples", c.scoring.ramp_samples},
      {"conventions", conventions},
      {"harmony", c.harmony},
      {"shade", c.shade},
      {"delta_min", c.optimizer.delta_min},
      {"population", c.optimizer.population},
      {"iterations", c.optimizer.iterations},
      {"local_move_probability", c.optimizer.local_move_probability},
      {"local_radius", c.optimizer.local_radius},
      {"archive_capacity", c.optimizer.archive_capacity},
      {"optimizer_seed", c.optimizer.seed},
      {"pixel_cap", c.analysis.pixel_cap},
      {"salient_threshold", c.analysis.salient_threshold},
      {"palette_size", c.analysis.palette_size},
      {"grid_size", c.analysis.grid_size},
      {"som_epochs", c.analysis.som_epochs},
      {"jncd", c.analysis.jncd},
      {"max_dominants", c.analysis.max_dominants},
      {"analysis_seed", c.analysis.seed},
  };
}

// Keys absent from `j` keep the values in `base`; unknown keys are rejected.
inline TransferConfig config_from_json(const Json& j, TransferConfig base = {}) {
  if (!j.is_object()) detail::fail(Errc::invalid_argument, "parameters must be a JSON object");
  const Json known = config_to_json(base);
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) detail::fail(Errc::invalid_argument, "unknown parameter: " + key);
  TransferConfig c = base;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("mode")) c.mode = tint_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("zone_method")) c.zone_method = zone_method_from_string(j.at("zone_method").get<std::string>());
    get("zones", c.zones);
    get("k", c.scoring.k);
    get("t", c.scoring.t);
    get("gamma", c.scoring.gamma);
    get("alpha", c.scoring.alpha);
    get("aerial", c.scoring.aerial_enabled);
    get("ramp_samples", c.scoring.ramp_samples);
    get("harmony", c.harmony);
    get("shade", c.shade);
    get("delta_min", c.optimizer.delta_min);
    get("population", c.optimizer.population);
    get("iterations", c.optimizer.iterations);
    get("local_move_probability", c.optimizer.local_move_probability);
    get("local_radius", c.optimizer.local_radius);
    get("archive_capacity", c.optimizer.archive_capacity);
    get("optimizer_seed", c.optimizer.seed);
    get("pixel_cap", c.analysis.pixel_cap);
    get("salient_threshold", c.analysis.salient_threshold);
    get("palette_size", c.analysis.palette_size);
    get("grid_size", c.analysis.grid_size);
    get("som_epochs", c.analysis.som_epochs);
    get("jncd", c.analysis.jncd);
    get("max_dominants", c.analysis.max_dominants);
    get("analysis_seed", c.analysis.seed);
    if (j.contains("conventions")) {
      c.conventions.assignments.clear();
      for (const auto& e : j.at("conventions")) c.conventions.assignments[e.at("zone").get<int>()] = lab_from_json(e);
    }
  } catch (const Json::exception& e) {
    detail::fail(Errc::invalid_argument, std::string("bad parameter value: ") + e.what());
  }
  return c;
}

inline void validate(const TransferConfig& c) {
  c.scoring.validate();
  c.optimizer.validate();
  if (c.zones < 2) detail::fail(Errc::invalid_argument, "zones must be at least 2");
  if (c.mode == TintMode::continuous && c.scoring.ramp_samples < c.zones)
    detail::fail(Errc::invalid_argument, "ramp_samples must be at least the zone count");
  for (const auto& [zone, _] : c.conventions.assignments)
    if (zone < 1 || zone > c.zones) detail::fail(Errc::invalid_argument, "convention zone out of range");
  if (c.analysis.palette_size < 1) detail::fail(Errc::invalid_argument, "palette_size must be at least 1");
  if (c.analysis.grid_size < 2) detail::fail(Errc::invalid_argument, "grid_size must be at least 2");
  if (c.analysis.som_epochs < 1) detail::fail(Errc::invalid_argument, "som_epochs must be at least 1");
  if (c.analysis.max_dominants < 2) detail::fail(Errc::invalid_argument, "max_dominants must be at least 2");
  if (!(c.analysis.jncd > 0.0)) detail::fail(Errc::invalid_argument, "jncd must be positive");
  if (!(c.analysis.salient_threshold >= 0.0 && c.analysis.salient_threshold < 1.0))
    detail::fail(Errc::invalid_argument, "salient_threshold must be in [0, 1)");
  HarmonyRegistry::instance().make(c.harmony);
}

struct ImageInput {
  Bytes data;
  std::string name;
};

struct DemInput {
  Bytes data;
  std::string name;             // extension selects the format (.asc / .png)
  std::optional<Bytes> sidecar; // JSON sidecar for PNG heightmaps

  static DemInput from_file(const std::filesystem::path& path) {
    DemInput in{read_file(path), path.filename().string(), std::nullopt};
    if (detail::lower(path.extension().string()) == ".png") in.sidecar = read_file(sidecar_path(path));
    return in;
  }
};

inline ImageInput image_from_file(const std::filesystem::path& path) { return {read_file(path), path.filename().string()}; }

namespace detail {

template <typename F>
auto run_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw StageError(stage, e.what(), e.code() != Errc::io_error);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), false);
  }
}

inline std::string_view as_text(const Bytes& b) { return {reinterpret_cast<const char*>(b.data()), b.size()}; }

}  // namespace detail

inline Dem decode_dem(const DemInput& in) {
  const std::string ext = detail::lower(std::filesystem::path(in.name).extension().string());
  if (ext == ".asc") return parse_asc(detail::as_text(in.data));
  if (ext == ".png") {
    if (!in.sidecar) detail::fail(Errc::malformed_header, "PNG heightmap needs a JSON sidecar");
    return decode_png_dem(in.data, detail::as_text(*in.sidecar));
  }
  detail::fail(Errc::unsupported_format, "DEM must be .asc or .png: " + in.name);
}

struct AnalysisResult {
  QuantizedPalette palette;
  ColorGrid grid;  // segmented
  DominantProfile profile;
};

inline AnalysisResult analyze_image(const ImageInput& image, const AnalysisConfig& cfg) {
  using detail::run_stage;
  const ImageRaster img = run_stage("load_image", [&] { return decode_image(image.data, cfg.pixel_cap); });
  const SaliencyMap sal = run_stage("compute_saliency", [&] { return compute_saliency(img); });
  const auto salient = run_stage("extract_salient_colors", [&] { return extract_salient_colors(img, sal, cfg.salient_threshold); });
  AnalysisResult out;
  out.palette = run_stage("quantize_colors", [&] {
    KMeansOptions opt;
    opt.seed = cfg.seed;
    return quantize_colors(salient, cfg.palette_size, opt);
  });
  const ColorGrid trained = run_stage("train_som", [&] { return train_som(out.palette, cfg.grid_size, cfg.som_epochs, cfg.seed); });
  out.grid = run_stage("segment_regions", [&] { return segment_regions(trained, cfg.jncd, cfg.max_dominants); });
  out.profile = run_stage("identify_dominants", [&] { return identify_dominants(out.grid); });
  return out;
}

struct RunManifest {
  Json document;

  std::string dump() const { return document.dump(2); }
  std::string digest() const { return sha256_hex(document.dump()); }
};

struct TransferResult {
  AnalysisResult analysis;
  Dem dem;
  ZoneMap zones;
  ZoneAreas areas;  // zone areas (graded) or sliver masses (continuous)
  ParetoArchive archive;
  Candidate midpoint;
  RunManifest manifest;
};

inline RunManifest make_manifest(const TransferConfig& cfg, const ImageInput& image, const DemInput& dem,
                                 const ParetoArchive& archive) {
  Json dem_doc = {{"name", dem.name}, {"sha256", sha256_hex(dem.data)}};
  if (dem.sidecar) dem_doc["sidecar_sha256"] = sha256_hex(*dem.sidecar);
  Json doc = {
      {"schema", "hypso.manifest/1"},
      {"components", {{"hypso", kVersion}, {"libpng", PNG_LIBPNG_VER_STRING}, {"libjpeg", JPEG_LIB_VERSION},
                      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)}}},
      {"inputs", {{"image", {{"name", image.name}, {"sha256", sha256_hex(image.data)}}}, {"dem", dem_doc}}},
      {"seeds", {{"analysis", cfg.analysis.seed}, {"optimizer", cfg.optimizer.seed}}},
      {"parameters", config_to_json(cfg)},
      {"result", {{"pareto_sha256", sha256_hex(pareto_to_json(archive).dump())}, {"front_size", archive.size()}}},
  };
  return {std::move(doc)};
}

inline TransferConfig config_from_manifest(const Json& manifest) {
  if (!manifest.is_object() || manifest.value("schema", "") != "hypso.manifest/1")
    detail::fail(Errc::invalid_argument, "not a run manifest");
  return config_from_json(manifest.at("parameters"));
}

inline TransferResult run_transfer(const ImageInput& image, const DemInput& dem_input, const TransferConfig& cfg) {
  using detail::run_stage;
  run_stage("config", [&] { validate(cfg); return 0; });
  const auto scorer = run_stage("config", [&] { return HarmonyRegistry::instance().make(cfg.harmony); });

  TransferResult out;
  out.analysis = analyze_image(image, cfg.analysis);
  out.dem = run_stage("load_dem", [&] { return decode_dem(dem_input); });
  out.zones = run_stage("classify_zones", [&] { return classify_zones(out.dem, cfg.zones, cfg.zone_method); });
  out.areas = run_stage("zone_areas", [&] {
    return cfg.mode == TintMode::graded ? zone_areas(out.zones) : elevation_slivers(out.dem, cfg.scoring.ramp_samples);
  });
  out.archive = run_stage("optimize", [&] {
    const TransferProblem problem{out.analysis.grid, cfg.zones,    cfg.mode, out.analysis.profile, out.areas,
                                  cfg.conventions,   cfg.scoring, *scorer,  cfg.optimizer.delta_min};
    return optimize(problem, cfg.optimizer);
  });
  out.midpoint = run_stage("select_midpoint", [&] { return select_midpoint(out.archive); });
  out.manifest = make_manifest(cfg, image, dem_input, out.archive);
  return out;
}

// Composite render of a scheme over the (optionally aerial-modulated)
// multidirectional hillshade.
inline RenderedMap render_scheme(const Dem& dem, const ZoneMap& zones, const TintScheme& scheme, const TransferConfig& cfg) {
  std::optional<Hillshade> shade;
  if (cfg.shade) {
    shade = hillshade(dem);
    if (cfg.scoring.aerial_enabled) shade = aerial_modulate(*shade, dem);
  }
  return render(dem, zones, scheme, shade);
}

}  // namespace hypso
