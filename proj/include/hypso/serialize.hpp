#pragma once

// JSON wire formats shared by the CLI, the HTTP service and the UI.

#include <string>
#include <vector>

#include <json.hpp>

#include "hypso/grid.hpp"
#include "hypso/optimizer.hpp"
#include "hypso/scoring.hpp"
#include "hypso/terrain.hpp"

namespace hypso {

using Json = nlohmann::json;

inline Json to_json(const LabColor& c) { return {{"L", c.L}, {"a", c.a}, {"b", c.b}}; }

inline LabColor lab_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("L") || !j.contains("a") || !j.contains("b"))
    detail::fail(Errc::invalid_argument, "color needs L, a and b");
  return {j.at("L").get<double>(), j.at("a").get<double>(), j.at("b").get<double>()};
}

inline std::string_view to_string(TintMode m) { return m == TintMode::graded ? "graded" : "continuous"; }

inline TintMode tint_mode_from_string(std::string_view s) {
  if (s == "graded") return TintMode::graded;
  if (s == "continuous") return TintMode::continuous;
  detail::fail(Errc::invalid_argument, "mode must be graded or continuous");
}

inline std::string_view to_string(ZoneMethod m) { return m == ZoneMethod::equal_interval ? "equal_interval" : "quantile"; }

inline ZoneMethod zone_method_from_string(std::string_view s) {
  if (s == "equal_interval") return ZoneMethod::equal_interval;
  if (s == "quantile") return ZoneMethod::quantile;
  detail::fail(Errc::invalid_argument, "zone_method must be equal_interval or quantile");
}

// {w, cells:[{row,col,L,a,b,region}], dominants:[{L,a,b,proportion}]}
inline Json grid_to_json(const ColorGrid& grid, const DominantProfile& profile) {
  Json cells = Json::array();
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const auto at = grid.coord(i);
    const auto& c = grid.cells[i];
    cells.push_back({{"row", at.row}, {"col", at.col}, {"L", c.color.L}, {"a", c.color.a}, {"b", c.color.b}, {"region", c.region}});
  }
  Json dominants = Json::array();
  for (const auto& d : profile.entries)
    dominants.push_back({{"L", d.color.L}, {"a", d.color.a}, {"b", d.color.b}, {"proportion", d.proportion}});
  return {{"w", grid.w}, {"cells", cells}, {"dominants", dominants}};
}

inline Json to_json(const ScoreReport& r) {
  return {{"f_g", r.f_g}, {"f_ap", r.f_ap}, {"f_c", r.f_c}, {"F_s", r.F_s}, {"f_d", r.f_d}, {"harmony", r.harmony}, {"F_a", r.F_a}};
}

// {coords:[[r,c]...], colors:[{L,a,b}...], F_s, F_a, mode}
inline Json solution_to_json(const Candidate& c) {
  Json coords = Json::array();
  for (const auto& at : c.coords) coords.push_back({at.row, at.col});
  Json colors = Json::array();
  for (const auto& col : c.scheme.colors) colors.push_back(to_json(col));
  return {{"coords", coords}, {"colors", colors}, {"F_s", c.F_s}, {"F_a", c.F_a}, {"mode", to_string(c.scheme.mode)}};
}

// Standalone scheme export (CLI scheme files, GET /api/jobs/{id}/scheme).
inline Json scheme_document(const Candidate& c) {
  Json doc = solution_to_json(c);
  doc["schema"] = "hypso.solution/1";
  return doc;
}

inline Candidate solution_from_json(const Json& j) {
  try {
    Candidate c;
    for (const auto& rc : j.at("coords")) c.coords.push_back({rc.at(0).get<int>(), rc.at(1).get<int>()});
    for (const auto& col : j.at("colors")) c.scheme.colors.push_back(lab_from_json(col));
    c.scheme.mode = tint_mode_from_string(j.at("mode").get<std::string>());
    c.F_s = j.value("F_s", 0.0);
    c.F_a = j.value("F_a", 0.0);
    if (c.scheme.colors.size() < 2) detail::fail(Errc::invalid_argument, "solution needs at least two colors");
    return c;
  } catch (const Json::exception& e) {
    detail::fail(Errc::invalid_argument, std::string("malformed solution JSON: ") + e.what());
  }
}

inline Json zone_report_to_json(const ZoneMap& zm, const ZoneAreas& areas) {
  return {{"n", zm.n}, {"boundaries", zm.boundaries}, {"areas", areas.proportions}};
}

// Sorted front with the midpoint index; solution indices used by the API
// refer to this order.
inline Json pareto_to_json(const ParetoArchive& archive) {
  const auto front = sorted_front(archive);
  Json solutions = Json::array();
  for (const auto& c : front) solutions.push_back(solution_to_json(c));
  Json out = {{"schema", "hypso.pareto/1"}, {"solutions", solutions}};
  out["midpoint"] = front.empty() ? Json(nullptr) : Json(midpoint_index(front.size()));
  return out;
}

}  // namespace hypso
