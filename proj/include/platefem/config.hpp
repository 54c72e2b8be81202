#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "platefem/adapt.hpp"
#include "platefem/builtin.hpp"
#include "platefem/mesh.hpp"
#include "platefem/model.hpp"

namespace platefem {

struct OutputConfig {
  std::string csv;      // records path; empty: derive from the output directory
  std::string vtk_dir;  // per-step VTK files; empty: no VTK output
  int sample_grid = 0;  // n x n deflection samples written next to the csv
};

/// A full batch-run description: geometry, material, loads, study and output.
/// Parsing is strict: unknown keys and out-of-range values are rejected with
/// the offending field path in the message.
struct RunConfig {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundarySegmentSpec> segments;
  Material material{1.0, 0.3, 1.0};
  LoadSpec loads;
  StudyConfig study;
  OutputConfig output;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config: JSON parse error in " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }

  /// Builds the mesh (with line-load tags) and the validated problem.
  PlateProblem make_problem() const {
    std::vector<Vec2> polyline;
    if (loads.line) polyline = loads.line->polyline;
    auto mesh = std::make_shared<const Mesh>(build_mesh(vertices, triangles, segments, polyline));
    return PlateProblem(mesh, material, loads);
  }
};

namespace detail {

inline void expect_keys(const nlohmann::json& j, const std::string& where,
                        const std::set<std::string>& allowed) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + ": expected an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw std::invalid_argument("config: " + where + "." + item.key() + ": unknown key");
}

inline double get_number(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number()) throw std::invalid_argument("config: " + field + ": expected a number");
  return j.get<double>();
}

inline Vec2 get_point(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("config: " + field + ": expected [x, y]");
  return {get_number(j[0], field + "[0]"), get_number(j[1], field + "[1]")};
}

inline EdgeTag parse_bc(const std::string& s, const std::string& field) {
  if (s == "clamped") return EdgeTag::clamped;
  if (s == "simply_supported") return EdgeTag::simply_supported;
  if (s == "free") return EdgeTag::free;
  throw std::invalid_argument("config: " + field +
                              ": expected clamped | simply_supported | free, got '" + s + "'");
}

}  // namespace detail

inline RunConfig RunConfig::from_json(const nlohmann::json& j) {
  using detail::expect_keys;
  using detail::get_number;
  using detail::get_point;
  RunConfig cfg;
  expect_keys(j, "config", {"geometry", "material", "loads", "study", "output"});

  if (!j.contains("geometry")) throw std::invalid_argument("config: geometry: missing");
  const auto& geo = j.at("geometry");
  expect_keys(geo, "geometry", {"vertices", "triangles", "boundary_segments"});
  for (const auto& v : geo.value("vertices", nlohmann::json::array()))
    cfg.vertices.push_back(get_point(v, "geometry.vertices"));
  for (const auto& t : geo.value("triangles", nlohmann::json::array())) {
    if (!t.is_array() || t.size() != 3)
      throw std::invalid_argument("config: geometry.triangles: expected [a, b, c]");
    cfg.triangles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
  }
  for (const auto& s : geo.value("boundary_segments", nlohmann::json::array())) {
    expect_keys(s, "geometry.boundary_segments[]", {"path", "bc"});
    BoundarySegmentSpec seg;
    if (!s.contains("path") || !s.contains("bc"))
      throw std::invalid_argument("config: geometry.boundary_segments[]: needs path and bc");
    for (const auto& v : s.at("path")) seg.path.push_back(v.get<int>());
    seg.kind = detail::parse_bc(s.at("bc").get<std::string>(), "geometry.boundary_segments[].bc");
    cfg.segments.push_back(std::move(seg));
  }

  if (j.contains("material")) {
    const auto& m = j.at("material");
    expect_keys(m, "material", {"E", "nu", "thickness"});
    try {
      cfg.material = Material(get_number(m.value("E", nlohmann::json(1.0)), "material.E"),
                              get_number(m.value("nu", nlohmann::json(0.3)), "material.nu"),
                              get_number(m.value("thickness", nlohmann::json(1.0)),
                                         "material.thickness"));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("config: material: ") + e.what());
    }
  }

  if (j.contains("loads")) {
    const auto& l = j.at("loads");
    expect_keys(l, "loads", {"distributed", "line", "points"});
    for (const auto& d : l.value("distributed", nlohmann::json::array())) {
      expect_keys(d, "loads.distributed[]", {"rect", "all", "value"});
      DistributedLoad load;
      if (!d.contains("value"))
        throw std::invalid_argument("config: loads.distributed[].value: missing");
      load.value = get_number(d.at("value"), "loads.distributed[].value");
      if (d.contains("rect")) {
        const auto& r = d.at("rect");
        if (!r.is_array() || r.size() != 4)
          throw std::invalid_argument(
              "config: loads.distributed[].rect: expected [xmin, ymin, xmax, ymax]");
        load.whole_domain = false;
        load.xmin = get_number(r[0], "loads.distributed[].rect[0]");
        load.ymin = get_number(r[1], "loads.distributed[].rect[1]");
        load.xmax = get_number(r[2], "loads.distributed[].rect[2]");
        load.ymax = get_number(r[3], "loads.distributed[].rect[3]");
      } else if (!d.value("all", false)) {
        throw std::invalid_argument("config: loads.distributed[]: needs rect or all=true");
      }
      cfg.loads.distributed.push_back(load);
    }
    if (l.contains("line")) {
      expect_keys(l.at("line"), "loads.line", {"polyline", "value"});
      LineLoad line;
      for (const auto& p : l.at("line").value("polyline", nlohmann::json::array()))
        line.polyline.push_back(get_point(p, "loads.line.polyline"));
      if (line.polyline.size() < 2)
        throw std::invalid_argument("config: loads.line.polyline: needs at least two points");
      if (!l.at("line").contains("value"))
        throw std::invalid_argument("config: loads.line.value: missing");
      line.value = get_number(l.at("line").at("value"), "loads.line.value");
      cfg.loads.line = std::move(line);
    }
    for (const auto& p : l.value("points", nlohmann::json::array())) {
      expect_keys(p, "loads.points[]", {"x", "y", "magnitude"});
      if (!p.contains("x") || !p.contains("y") || !p.contains("magnitude"))
        throw std::invalid_argument("config: loads.points[]: needs x, y and magnitude");
      cfg.loads.points.push_back({{get_number(p.at("x"), "loads.points[].x"),
                                   get_number(p.at("y"), "loads.points[].y")},
                                  get_number(p.at("magnitude"), "loads.points[].magnitude")});
    }
  }

  if (j.contains("study")) {
    const auto& s = j.at("study");
    expect_keys(s, "study", {"strategy", "theta", "max_dofs", "max_steps"});
    if (s.contains("strategy")) {
      const std::string strat = s.at("strategy").get<std::string>();
      if (strat == "uniform") cfg.study.strategy = RefinementStrategy::uniform;
      else if (strat == "adaptive") cfg.study.strategy = RefinementStrategy::adaptive;
      else throw std::invalid_argument("config: study.strategy: expected uniform | adaptive");
    }
    if (s.contains("theta")) {
      const double theta = get_number(s.at("theta"), "study.theta");
      if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("config: study.theta: must lie in the open interval (0,1)");
      cfg.study.marking = MarkingParams(theta);
    }
    if (s.contains("max_dofs")) cfg.study.max_dofs = s.at("max_dofs").get<long>();
    if (s.contains("max_steps")) cfg.study.max_steps = s.at("max_steps").get<int>();
    try {
      cfg.study.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("config: ") + e.what());
    }
  }

  if (j.contains("output")) {
    const auto& o = j.at("output");
    expect_keys(o, "output", {"csv", "vtk_dir", "sample_grid"});
    cfg.output.csv = o.value("csv", std::string{});
    cfg.output.vtk_dir = o.value("vtk_dir", std::string{});
    cfg.output.sample_grid = o.value("sample_grid", 0);
    if (cfg.output.sample_grid < 0)
      throw std::invalid_argument("config: output.sample_grid: must be >= 0");
  }
  return cfg;
}

}  // namespace platefem
