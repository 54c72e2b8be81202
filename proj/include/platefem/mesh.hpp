#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "platefem/geometry.hpp"

namespace platefem {

enum class EdgeTag { interior, clamped, simply_supported, free };

inline const char* to_string(EdgeTag t) {
  switch (t) {
    case EdgeTag::interior: return "interior";
    case EdgeTag::clamped: return "clamped";
    case EdgeTag::simply_supported: return "simply_supported";
    case EdgeTag::free: return "free";
  }
  return "?";
}

struct Vertex {
  int id = -1;
  double x = 0.0;
  double y = 0.0;
  Vec2 pos() const { return {x, y}; }
};

/// Counterclockwise triangle. `peak` is the local index of the newest vertex;
/// the refinement edge for bisection is the edge opposite to it.
struct Triangle {
  int id = -1;
  std::array<int, 3> v{-1, -1, -1};
  std::array<int, 3> edges{-1, -1, -1};  // edges[k] joins v[k] and v[(k+1)%3]
  int peak = 2;
  int refinement_edge_slot() const { return (peak + 1) % 3; }
};

/// Canonical orientation: endpoints ordered lower id first, tangent points
/// a -> b, normal is the ccw rotation of the tangent. The canonical frame is
/// shared by both adjacent elements.
struct Edge {
  int id = -1;
  int a = -1, b = -1;  // a < b
  std::array<int, 2> tris{-1, -1};
  EdgeTag tag = EdgeTag::interior;
  bool on_line_load = false;
  double length = 0.0;  // h_E
  Vec2 tangent{};
  Vec2 normal{};
  Vec2 midpoint{};
  bool is_boundary() const { return tris[1] < 0; }
};

struct BoundarySegmentSpec {
  std::vector<int> path;  // consecutive vertex ids along the boundary
  EdgeTag kind = EdgeTag::simply_supported;
};

struct Mesh {
  std::vector<Vertex> vertices;
  std::vector<Triangle> triangles;
  std::vector<Edge> edges;
  std::vector<double> h_K;  // per-triangle diameter (longest edge)
  double h_max = 0.0;
  double min_angle_deg = 0.0;
  double geom_tol = 1e-9;

  // Geometric descriptions, inherited across refinement.
  std::vector<std::pair<std::vector<Vec2>, EdgeTag>> boundary_description;
  std::vector<Vec2> line_load_polyline;  // empty when no line load

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  Vec2 vertex_pos(int v) const { return vertices[v].pos(); }
  Vec2 tri_vertex_pos(int t, int k) const { return vertices[triangles[t].v[k]].pos(); }

  double area(int t) const {
    return 0.5 * signed_area2(tri_vertex_pos(t, 0), tri_vertex_pos(t, 1), tri_vertex_pos(t, 2));
  }
  Vec2 centroid(int t) const {
    const Vec2 p0 = tri_vertex_pos(t, 0), p1 = tri_vertex_pos(t, 1), p2 = tri_vertex_pos(t, 2);
    return {(p0.x + p1.x + p2.x) / 3.0, (p0.y + p1.y + p2.y) / 3.0};
  }

  /// Id of the other triangle across edge e, or -1 on the boundary.
  int neighbor_across(int e, int t) const {
    const Edge& ed = edges[e];
    return ed.tris[0] == t ? ed.tris[1] : ed.tris[0];
  }

  /// Finds the vertex at p within the geometric tolerance, or -1.
  int find_vertex(Vec2 p) const {
    for (const Vertex& v : vertices)
      if (norm(v.pos() - p) <= geom_tol) return v.id;
    return -1;
  }

  /// Containing triangle of p (barycentric test with tolerance), or -1.
  int locate_triangle(Vec2 p) const {
    for (const Triangle& t : triangles) {
      const Vec2 a = vertex_pos(t.v[0]), b = vertex_pos(t.v[1]), c = vertex_pos(t.v[2]);
      const double a2 = signed_area2(a, b, c);
      const double tol = -geom_tol * a2;
      if (signed_area2(p, a, b) >= tol && signed_area2(p, b, c) >= tol &&
          signed_area2(p, c, a) >= tol)
        return t.id;
    }
    return -1;
  }
};

struct MeshStats {
  int V = 0, E = 0, T = 0;
  long N = 0;  // Argyris dofs: 6V + E
  double h_max = 0.0;
  double min_angle_deg = 0.0;
};

inline MeshStats mesh_statistics(const Mesh& m) {
  MeshStats s;
  s.V = m.n_vertices();
  s.E = m.n_edges();
  s.T = m.n_triangles();
  s.N = 6L * s.V + s.E;
  s.h_max = m.h_max;
  s.min_angle_deg = m.min_angle_deg;
  return s;
}

namespace detail {

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct EdgeTagInfo {
  EdgeTag tag = EdgeTag::interior;
  bool on_line_load = false;
};

using EdgeTagRegistry = std::unordered_map<std::uint64_t, EdgeTagInfo>;

struct TriangleSeed {
  std::array<int, 3> v;
  int peak = -1;  // -1: assign by longest edge
};

/// Core constructor shared by build_mesh and the refinement routines:
/// derives edges and adjacency, fixes the canonical orientation, applies
/// tags and computes the size/shape statistics.
inline Mesh assemble_mesh(std::vector<Vec2> points, std::vector<TriangleSeed> seeds,
                          const EdgeTagRegistry& tags, bool require_boundary_tags) {
  Mesh m;
  m.vertices.resize(points.size());
  double lo_x = std::numeric_limits<double>::max(), lo_y = lo_x;
  double hi_x = std::numeric_limits<double>::lowest(), hi_y = hi_x;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y))
      throw std::invalid_argument("mesh: non-finite vertex coordinate at vertex " + std::to_string(i));
    m.vertices[i] = {static_cast<int>(i), points[i].x, points[i].y};
    lo_x = std::min(lo_x, points[i].x);
    hi_x = std::max(hi_x, points[i].x);
    lo_y = std::min(lo_y, points[i].y);
    hi_y = std::max(hi_y, points[i].y);
  }
  const double diag = std::hypot(hi_x - lo_x, hi_y - lo_y);
  m.geom_tol = 1e-9 * std::max(1.0, diag);

  const int nv = m.n_vertices();
  m.triangles.resize(seeds.size());
  for (std::size_t t = 0; t < seeds.size(); ++t) {
    std::array<int, 3> v = seeds[t].v;
    int peak = seeds[t].peak;
    for (int k = 0; k < 3; ++k)
      if (v[k] < 0 || v[k] >= nv)
        throw std::invalid_argument("mesh: triangle " + std::to_string(t) + " has invalid vertex id");
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
      throw std::invalid_argument("mesh: triangle " + std::to_string(t) + " has repeated vertices");
    const double a2 = signed_area2(points[v[0]], points[v[1]], points[v[2]]);
    if (std::abs(a2) <= m.geom_tol * m.geom_tol)
      throw std::invalid_argument("mesh: degenerate (zero-area) triangle " + std::to_string(t));
    if (a2 < 0.0) {
      std::swap(v[1], v[2]);
      if (peak == 1) peak = 2;
      else if (peak == 2) peak = 1;
    }
    Triangle& tri = m.triangles[t];
    tri.id = static_cast<int>(t);
    tri.v = v;
    tri.peak = peak;  // may still be -1; fixed below once edges exist
  }

  // Derive edges with adjacency in deterministic (triangle id) order.
  std::unordered_map<std::uint64_t, int> edge_ids;
  edge_ids.reserve(seeds.size() * 2);
  for (Triangle& tri : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = tri.v[k], b = tri.v[(k + 1) % 3];
      const std::uint64_t key = edge_key(a, b);
      auto [it, inserted] = edge_ids.try_emplace(key, m.n_edges());
      if (inserted) {
        Edge e;
        e.id = it->second;
        e.a = std::min(a, b);
        e.b = std::max(a, b);
        e.tris[0] = tri.id;
        m.edges.push_back(e);
      } else {
        Edge& e = m.edges[it->second];
        if (e.tris[1] >= 0)
          throw std::invalid_argument("mesh: nonconforming input (edge shared by more than two triangles)");
        e.tris[1] = tri.id;
      }
      tri.edges[k] = it->second;
    }
  }

  for (Edge& e : m.edges) {
    const Vec2 pa = m.vertex_pos(e.a), pb = m.vertex_pos(e.b);
    e.length = norm(pb - pa);
    e.tangent = normalized(pb - pa);
    e.normal = rot90ccw(e.tangent);
    e.midpoint = 0.5 * (pa + pb);
    if (auto it = tags.find(edge_key(e.a, e.b)); it != tags.end()) {
      e.tag = it->second.tag;
      e.on_line_load = it->second.on_line_load;
    }
    if (e.is_boundary() && require_boundary_tags && e.tag == EdgeTag::interior)
      throw std::invalid_argument("mesh: boundary edge (" + std::to_string(e.a) + "," +
                                  std::to_string(e.b) + ") carries no boundary condition");
    if (!e.is_boundary() && e.tag != EdgeTag::interior)
      throw std::invalid_argument("mesh: interior edge tagged as boundary");
    if (e.on_line_load && e.tag != EdgeTag::interior)
      throw std::invalid_argument("mesh: line load must run along interior edges");
  }

  // Size and shape statistics; default peaks point at the longest edge.
  m.h_K.resize(m.n_triangles());
  m.h_max = 0.0;
  m.min_angle_deg = 180.0;
  for (Triangle& tri : m.triangles) {
    double longest = -1.0;
    int longest_slot = 0;
    for (int k = 0; k < 3; ++k) {
      const double len = m.edges[tri.edges[k]].length;
      if (len > longest + m.geom_tol) {
        longest = len;
        longest_slot = k;
      }
    }
    m.h_K[tri.id] = longest;
    m.h_max = std::max(m.h_max, longest);
    if (tri.peak < 0) tri.peak = (longest_slot + 2) % 3;
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = m.tri_vertex_pos(tri.id, (k + 1) % 3) - m.tri_vertex_pos(tri.id, k);
      const Vec2 w = m.tri_vertex_pos(tri.id, (k + 2) % 3) - m.tri_vertex_pos(tri.id, k);
      const double ang = std::acos(std::clamp(dot(u, w) / (norm(u) * norm(w)), -1.0, 1.0));
      m.min_angle_deg = std::min(m.min_angle_deg, ang * 180.0 / M_PI);
    }
  }
  return m;
}

inline bool point_on_segment(Vec2 p, Vec2 a, Vec2 b, double tol) {
  return segment_distance(p, a, b) <= tol;
}

}  // namespace detail

/// Builds a validated mesh from a conforming triangulation. Boundary segments
/// are vertex-id paths along the boundary; every boundary edge must be
/// covered by exactly one segment kind. The optional line-load polyline must
/// be covered by interior mesh edges.
inline Mesh build_mesh(const std::vector<Vec2>& points,
                       const std::vector<std::array<int, 3>>& tris,
                       const std::vector<BoundarySegmentSpec>& segments,
                       const std::vector<Vec2>& line_load_polyline = {}) {
  // First pass without tags to discover edges and adjacency.
  std::vector<detail::TriangleSeed> seeds(tris.size());
  for (std::size_t t = 0; t < tris.size(); ++t) seeds[t] = {tris[t], -1};
  Mesh probe = detail::assemble_mesh(points, seeds, {}, false);

  // Duplicate vertices make the adjacency silently wrong; reject them.
  {
    std::vector<int> order(probe.n_vertices());
    for (int i = 0; i < probe.n_vertices(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) {
      return probe.vertices[i].x != probe.vertices[j].x ? probe.vertices[i].x < probe.vertices[j].x
                                                        : probe.vertices[i].y < probe.vertices[j].y;
    });
    for (int i = 0; i + 1 < probe.n_vertices(); ++i)
      if (norm(probe.vertex_pos(order[i]) - probe.vertex_pos(order[i + 1])) <= probe.geom_tol)
        throw std::invalid_argument("mesh: nonconforming input (duplicate vertices)");
  }

  // Hanging vertices show up as boundary-looking edges with a vertex strictly
  // inside them.
  for (const Edge& e : probe.edges) {
    if (!e.is_boundary()) continue;
    const Vec2 pa = probe.vertex_pos(e.a), pb = probe.vertex_pos(e.b);
    for (const Vertex& v : probe.vertices) {
      if (v.id == e.a || v.id == e.b) continue;
      if (detail::point_on_segment(v.pos(), pa, pb, probe.geom_tol))
        throw std::invalid_argument("mesh: nonconforming input (hanging vertex " +
                                    std::to_string(v.id) + ")");
    }
  }

  detail::EdgeTagRegistry tags;
  std::unordered_map<std::uint64_t, int> probe_ids;
  for (const Edge& e : probe.edges) probe_ids[detail::edge_key(e.a, e.b)] = e.id;

  for (const BoundarySegmentSpec& seg : segments) {
    if (seg.kind == EdgeTag::interior)
      throw std::invalid_argument("mesh: boundary segment kind cannot be 'interior'");
    if (seg.path.size() < 2)
      throw std::invalid_argument("mesh: boundary segment path needs at least two vertices");
    for (std::size_t i = 0; i + 1 < seg.path.size(); ++i) {
      const int a = seg.path[i], b = seg.path[i + 1];
      if (a < 0 || a >= probe.n_vertices() || b < 0 || b >= probe.n_vertices())
        throw std::invalid_argument("mesh: boundary segment refers to unknown vertex");
      auto it = probe_ids.find(detail::edge_key(a, b));
      if (it == probe_ids.end() || !probe.edges[it->second].is_boundary())
        throw std::invalid_argument("mesh: boundary segment edge (" + std::to_string(a) + "," +
                                    std::to_string(b) + ") is not on the boundary");
      auto [tag_it, inserted] =
          tags.try_emplace(detail::edge_key(a, b), detail::EdgeTagInfo{seg.kind, false});
      if (!inserted && tag_it->second.tag != seg.kind)
        throw std::invalid_argument("mesh: conflicting boundary kinds on edge (" +
                                    std::to_string(a) + "," + std::to_string(b) + ")");
    }
  }

  // Mark interior edges lying on the line-load polyline and check coverage.
  if (line_load_polyline.size() == 1)
    throw std::invalid_argument("mesh: line-load polyline needs at least two points");
  if (line_load_polyline.size() >= 2) {
    std::vector<double> covered(line_load_polyline.size() - 1, 0.0);
    for (const Edge& e : probe.edges) {
      const Vec2 pa = probe.vertex_pos(e.a), pb = probe.vertex_pos(e.b);
      for (std::size_t s = 0; s + 1 < line_load_polyline.size(); ++s) {
        if (detail::point_on_segment(pa, line_load_polyline[s], line_load_polyline[s + 1], probe.geom_tol) &&
            detail::point_on_segment(pb, line_load_polyline[s], line_load_polyline[s + 1], probe.geom_tol)) {
          if (e.is_boundary())
            throw std::invalid_argument("mesh: line load must lie inside the domain, not on the boundary");
          auto& info = tags[detail::edge_key(e.a, e.b)];
          info.on_line_load = true;
          covered[s] += e.length;
          break;
        }
      }
    }
    for (std::size_t s = 0; s + 1 < line_load_polyline.size(); ++s) {
      const double len = norm(line_load_polyline[s + 1] - line_load_polyline[s]);
      if (std::abs(covered[s] - len) > 1e-6 * std::max(1.0, len))
        throw std::invalid_argument("mesh: line-load polyline segment " + std::to_string(s) +
                                    " is not covered by mesh edges");
    }
  }

  Mesh m = detail::assemble_mesh(points, seeds, tags, true);
  for (const BoundarySegmentSpec& seg : segments) {
    std::vector<Vec2> pts;
    pts.reserve(seg.path.size());
    for (int v : seg.path) pts.push_back(m.vertex_pos(v));
    m.boundary_description.emplace_back(std::move(pts), seg.kind);
  }
  m.line_load_polyline = line_load_polyline;
  return m;
}

namespace detail {

/// Registers the tags of both halves of a split edge (or of the edge itself
/// when it survives) for the refined mesh.
inline void inherit_edge_tags(const Mesh& m, const std::unordered_map<std::uint64_t, int>& midpoint_of,
                              EdgeTagRegistry& tags) {
  for (const Edge& e : m.edges) {
    if (e.tag == EdgeTag::interior && !e.on_line_load) continue;
    const EdgeTagInfo info{e.tag, e.on_line_load};
    auto it = midpoint_of.find(edge_key(e.a, e.b));
    if (it == midpoint_of.end()) {
      tags[edge_key(e.a, e.b)] = info;
    } else {
      tags[edge_key(e.a, it->second)] = info;
      tags[edge_key(it->second, e.b)] = info;
    }
  }
}

}  // namespace detail

/// Red refinement: every triangle splits into four similar subtriangles via
/// the edge midpoints. Minimum angle is preserved exactly.
inline Mesh refine_uniform_red(const Mesh& m) {
  std::vector<Vec2> points(m.n_vertices());
  for (const Vertex& v : m.vertices) points[v.id] = v.pos();
  std::unordered_map<std::uint64_t, int> midpoint_of;
  midpoint_of.reserve(m.n_edges());
  for (const Edge& e : m.edges) {
    midpoint_of[detail::edge_key(e.a, e.b)] = static_cast<int>(points.size());
    points.push_back(e.midpoint);
  }

  std::vector<detail::TriangleSeed> seeds;
  seeds.reserve(4 * m.n_triangles());
  for (const Triangle& t : m.triangles) {
    const int v0 = t.v[0], v1 = t.v[1], v2 = t.v[2];
    const int m01 = midpoint_of[detail::edge_key(v0, v1)];
    const int m12 = midpoint_of[detail::edge_key(v1, v2)];
    const int m20 = midpoint_of[detail::edge_key(v2, v0)];
    seeds.push_back({{v0, m01, m20}, -1});
    seeds.push_back({{m01, v1, m12}, -1});
    seeds.push_back({{m20, m12, v2}, -1});
    seeds.push_back({{m01, m12, m20}, -1});
  }

  detail::EdgeTagRegistry tags;
  detail::inherit_edge_tags(m, midpoint_of, tags);
  Mesh out = detail::assemble_mesh(points, seeds, tags, true);
  out.boundary_description = m.boundary_description;
  out.line_load_polyline = m.line_load_polyline;
  return out;
}

/// Newest-vertex bisection with conformity closure. Every marked triangle is
/// bisected twice (area quartered); neighbors are bisected as needed so that
/// no hanging vertices remain. An empty marked set returns an identical mesh.
inline Mesh refine_marked(const Mesh& m, const std::vector<int>& marked) {
  if (marked.empty()) return m;

  std::vector<char> edge_marked(m.n_edges(), 0);
  for (int t : marked) {
    if (t < 0 || t >= m.n_triangles())
      throw std::invalid_argument("refine_marked: invalid triangle id " + std::to_string(t));
    for (int e : m.triangles[t].edges) edge_marked[e] = 1;
  }

  // Closure: a triangle with any marked edge must have its refinement edge
  // marked, so that bisections meet conformally.
  for (bool changed = true; changed;) {
    changed = false;
    for (const Triangle& t : m.triangles) {
      const int ref = t.edges[t.refinement_edge_slot()];
      if (edge_marked[ref]) continue;
      if (edge_marked[t.edges[0]] || edge_marked[t.edges[1]] || edge_marked[t.edges[2]]) {
        edge_marked[ref] = 1;
        changed = true;
      }
    }
  }

  std::vector<Vec2> points(m.n_vertices());
  for (const Vertex& v : m.vertices) points[v.id] = v.pos();
  std::unordered_map<std::uint64_t, int> midpoint_of;
  for (const Edge& e : m.edges) {
    if (!edge_marked[e.id]) continue;
    midpoint_of[detail::edge_key(e.a, e.b)] = static_cast<int>(points.size());
    points.push_back(e.midpoint);
  }

  std::vector<detail::TriangleSeed> seeds;
  seeds.reserve(m.n_triangles() * 2);
  // Bisect (a, b, c) at the midpoint of (a, b); children's refinement edges
  // are the old edges (c,a) and (b,c), split in turn when marked. New cut
  // edges never carry midpoints, so the recursion is at most two deep.
  auto emit = [&](auto&& self, int a, int b, int c) -> void {
    auto it = midpoint_of.find(detail::edge_key(a, b));
    if (it == midpoint_of.end()) {
      seeds.push_back({{a, b, c}, 2});
      return;
    }
    const int mid = it->second;
    self(self, c, a, mid);
    self(self, b, c, mid);
  };
  for (const Triangle& t : m.triangles) {
    const int ref = t.edges[t.refinement_edge_slot()];
    if (!edge_marked[ref]) {
      seeds.push_back({t.v, t.peak});
      continue;
    }
    const int c = t.v[t.peak];
    const int a = t.v[(t.peak + 1) % 3];
    const int b = t.v[(t.peak + 2) % 3];
    emit(emit, a, b, c);
  }

  detail::EdgeTagRegistry tags;
  detail::inherit_edge_tags(m, midpoint_of, tags);
  Mesh out = detail::assemble_mesh(points, seeds, tags, true);
  out.boundary_description = m.boundary_description;
  out.line_load_polyline = m.line_load_polyline;
  return out;
}

}  // namespace platefem
