#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "platefem/adapt.hpp"
#include "platefem/mesh.hpp"
#include "platefem/model.hpp"
#include "platefem/oracle.hpp"

namespace platefem {

/// Tensor-grid triangulation of [xs.front(), xs.back()] x [ys...], every cell
/// split along the lower-left to upper-right diagonal. One boundary kind per
/// side: bottom, right, top, left.
inline Mesh grid_mesh(const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::array<EdgeTag, 4>& sides,
                      const std::vector<Vec2>& line_load_polyline = {}) {
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid_mesh: need at least a 2x2 grid");
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) pts.push_back({xs[i], ys[j]});
  auto id = [nx](int i, int j) { return j * nx + i; };

  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(nx - 1) * (ny - 1) * 2);
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }

  std::vector<BoundarySegmentSpec> segments(4);
  for (int i = 0; i < nx; ++i) {
    segments[0].path.push_back(id(i, 0));           // bottom
    segments[2].path.push_back(id(nx - 1 - i, ny - 1));  // top
  }
  for (int j = 0; j < ny; ++j) {
    segments[1].path.push_back(id(nx - 1, j));      // right
    segments[3].path.push_back(id(0, ny - 1 - j));  // left
  }
  for (int k = 0; k < 4; ++k) segments[k].kind = sides[k];
  return build_mesh(pts, tris, segments, line_load_polyline);
}

/// L-shaped domain [0,2]^2 minus [1,2]x[1,2] on a uniform grid with spacing h
/// (2/h cells per side). The re-entrant corner sits at (1,1); its two edges
/// get `corner_kind`, the remaining boundary `other_kind`.
inline Mesh lshape_mesh(int cells_per_side, EdgeTag corner_kind, EdgeTag other_kind) {
  const int n = cells_per_side;  // over the full [0,2] span; must be even
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("lshape_mesh: cells_per_side must be even");
  const double h = 2.0 / n;
  const int half = n / 2;

  std::vector<Vec2> pts;
  std::vector<int> id((n + 1) * (n + 1), -1);
  auto idx = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      if (i > half && j > half) continue;  // removed quadrant
      id[idx(i, j)] = static_cast<int>(pts.size());
      pts.push_back({i * h, j * h});
    }

  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i >= half && j >= half) continue;
      const int v00 = id[idx(i, j)], v10 = id[idx(i + 1, j)];
      const int v11 = id[idx(i + 1, j + 1)], v01 = id[idx(i, j + 1)];
      tris.push_back({v00, v10, v11});
      tris.push_back({v00, v11, v01});
    }

  // Boundary walk (0,0) -> (2,0) -> (2,1) -> (1,1) -> (1,2) -> (0,2) -> (0,0);
  // the two legs meeting at (1,1) form the corner segment.
  BoundarySegmentSpec corner;
  corner.kind = corner_kind;
  for (int i = n; i >= half; --i) corner.path.push_back(id[idx(i, half)]);   // (2,1) -> (1,1)
  for (int j = half; j <= n; ++j)
    if (j > half) corner.path.push_back(id[idx(half, j)]);                   // (1,1) -> (1,2)

  BoundarySegmentSpec rest;
  rest.kind = other_kind;
  for (int i = half; i >= 0; --i) rest.path.push_back(id[idx(i, n)]);        // (1,2) -> (0,2)
  for (int j = n; j >= 0; --j)
    if (j < n) rest.path.push_back(id[idx(0, j)]);                           // (0,2) -> (0,0)
  for (int i = 0; i <= n; ++i)
    if (i > 0) rest.path.push_back(id[idx(i, 0)]);                           // (0,0) -> (2,0)
  for (int j = 0; j <= half; ++j)
    if (j > 0) rest.path.push_back(id[idx(n, j)]);                           // (2,0) -> (2,1)

  return build_mesh(pts, tris, {corner, rest});
}

/// Fully symmetric 8-triangle unit square: the four cell diagonals all point
/// at the center vertex, so the mesh is invariant under both axis
/// reflections and the diagonal swap. This is the benchmark initial mesh for
/// the center point load.
inline Mesh symmetric_square_mesh(EdgeTag kind = EdgeTag::simply_supported) {
  const std::vector<Vec2> pts{{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0},
                              {0.0, 0.5}, {0.5, 0.5}, {1.0, 0.5},
                              {0.0, 1.0}, {0.5, 1.0}, {1.0, 1.0}};
  const std::vector<std::array<int, 3>> tris{
      {0, 1, 4}, {0, 4, 3},
      {1, 2, 4}, {2, 5, 4},
      {3, 4, 6}, {4, 7, 6},
      {4, 5, 8}, {4, 8, 7},
  };
  std::vector<BoundarySegmentSpec> segs(4);
  segs[0] = {{0, 1, 2}, kind};
  segs[1] = {{2, 5, 8}, kind};
  segs[2] = {{8, 7, 6}, kind};
  segs[3] = {{6, 3, 0}, kind};
  return build_mesh(pts, tris, segs);
}

enum class BuiltinCase { point, line, square, lshape_ss, lshape_cc, lshape_free };

inline std::optional<BuiltinCase> parse_builtin(const std::string& name) {
  if (name == "point") return BuiltinCase::point;
  if (name == "line") return BuiltinCase::line;
  if (name == "square") return BuiltinCase::square;
  if (name == "lshape_ss") return BuiltinCase::lshape_ss;
  if (name == "lshape_cc") return BuiltinCase::lshape_cc;
  if (name == "lshape_free") return BuiltinCase::lshape_free;
  return std::nullopt;
}

inline std::string builtin_name(BuiltinCase c) {
  switch (c) {
    case BuiltinCase::point: return "point";
    case BuiltinCase::line: return "line";
    case BuiltinCase::square: return "square";
    case BuiltinCase::lshape_ss: return "lshape_ss";
    case BuiltinCase::lshape_cc: return "lshape_cc";
    case BuiltinCase::lshape_free: return "lshape_free";
  }
  return "?";
}

struct CaseSetup {
  std::string name;
  std::shared_ptr<const Mesh> mesh;
  Material material;
  LoadSpec loads;
  std::optional<NavierCase> navier;  // closed-form reference, when one exists
  ErrorMetric metric;                // energy error via the point-load identity

  PlateProblem problem() const { return PlateProblem(mesh, material, loads); }
};

/// The benchmark configurations: E = 1, nu = 0.3, d = 1 everywhere; unit
/// square with simply supported boundary for the point (F0 = 1), line
/// (g0 = 1 along x = 1/2, |y - 1/2| <= 1/3) and square (f0 = 1 on
/// [1/6,5/6]^2) loads, and the L-shaped domain under f = 1 with three
/// boundary-condition variants at the re-entrant corner.
inline CaseSetup make_builtin(BuiltinCase which) {
  const Material mat(1.0, 0.3, 1.0);
  const std::array<EdgeTag, 4> ss{EdgeTag::simply_supported, EdgeTag::simply_supported,
                                  EdgeTag::simply_supported, EdgeTag::simply_supported};
  CaseSetup setup;
  setup.name = builtin_name(which);
  setup.material = mat;
  switch (which) {
    case BuiltinCase::point: {
      setup.mesh = std::make_shared<const Mesh>(symmetric_square_mesh());
      setup.loads.points.push_back({{0.5, 0.5}, 1.0});
      setup.navier = NavierCase::point(1.0, mat);
      setup.metric = [mat](const Solution& s) { return energy_error_point_load(s, 1.0, mat); };
      break;
    }
    case BuiltinCase::line: {
      const std::vector<double> ticks{0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0};
      const std::vector<Vec2> polyline{{0.5, 1.0 / 6.0}, {0.5, 5.0 / 6.0}};
      setup.mesh = std::make_shared<const Mesh>(grid_mesh(ticks, ticks, ss, polyline));
      setup.loads.line = LineLoad{polyline, 1.0};
      setup.navier = NavierCase::line(1.0, 1.0 / 3.0, mat);
      break;
    }
    case BuiltinCase::square: {
      const std::vector<double> ticks{0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0};
      setup.mesh = std::make_shared<const Mesh>(grid_mesh(ticks, ticks, ss));
      setup.loads.distributed.push_back(
          {false, 1.0 / 6.0, 1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0});
      setup.navier = NavierCase::square(1.0, 1.0 / 3.0, 1.0 / 3.0, mat);
      break;
    }
    case BuiltinCase::lshape_ss:
    case BuiltinCase::lshape_cc:
    case BuiltinCase::lshape_free: {
      const EdgeTag corner = which == BuiltinCase::lshape_ss   ? EdgeTag::simply_supported
                             : which == BuiltinCase::lshape_cc ? EdgeTag::clamped
                                                               : EdgeTag::free;
      const EdgeTag rest = which == BuiltinCase::lshape_cc ? EdgeTag::clamped
                                                           : EdgeTag::simply_supported;
      setup.mesh = std::make_shared<const Mesh>(lshape_mesh(8, corner, rest));
      setup.loads.distributed.push_back({true, 0, 0, 0, 0, 1.0});
      break;
    }
  }
  return setup;
}

}  // namespace platefem
