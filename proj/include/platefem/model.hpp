#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "platefem/element.hpp"
#include "platefem/mesh.hpp"

namespace platefem {

/// Isotropic linearly elastic plate material.
struct Material {
  double E = 1.0;
  double nu = 0.3;
  double thickness = 1.0;

  Material() = default;
  Material(double young, double poisson, double d) : E(young), nu(poisson), thickness(d) {
    if (!(E > 0.0)) throw std::invalid_argument("material: Young's modulus must be positive");
    if (!(nu >= 0.0 && nu <= 0.5))
      throw std::invalid_argument("material: Poisson ratio must lie in [0, 1/2]");
    if (!(thickness > 0.0)) throw std::invalid_argument("material: thickness must be positive");
  }

  double bending_stiffness() const {
    return E * thickness * thickness * thickness / (12.0 * (1.0 - nu * nu));
  }
  double d3_over_12() const { return thickness * thickness * thickness / 12.0; }
};

inline double bending_stiffness(const Material& m) { return m.bending_stiffness(); }

/// Symmetric 2x2 tensor stored as (xx, xy, yy).
struct SymMat2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
  double trace() const { return xx + yy; }
};

/// E A = E/(1+nu) (A + nu/(1-nu) tr(A) I).
inline SymMat2 constitutive_apply(const SymMat2& A, const Material& mat) {
  const double s = mat.E / (1.0 + mat.nu);
  const double r = mat.nu / (1.0 - mat.nu) * A.trace();
  return {s * (A.xx + r), s * A.xy, s * (A.yy + r)};
}

/// Constant distributed load on an axis-aligned rectangle (or everywhere).
struct DistributedLoad {
  bool whole_domain = true;
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
  double value = 0.0;

  bool contains(Vec2 p, double tol = 0.0) const {
    if (whole_domain) return true;
    return p.x >= xmin - tol && p.x <= xmax + tol && p.y >= ymin - tol && p.y <= ymax + tol;
  }
  bool contains_strict(Vec2 p, double tol) const {
    if (whole_domain) return true;
    return p.x > xmin + tol && p.x < xmax - tol && p.y > ymin + tol && p.y < ymax - tol;
  }
};

struct LineLoad {
  std::vector<Vec2> polyline;
  double value = 0.0;
};

struct PointLoad {
  Vec2 at{};
  double magnitude = 0.0;
  int vertex = -1;  // resolved against the mesh
};

struct LoadSpec {
  std::vector<DistributedLoad> distributed;
  std::optional<LineLoad> line;
  std::vector<PointLoad> points;
};

/// Kirchhoff plate problem: mesh with boundary tags, material and loads.
/// Construction validates the load/mesh compatibility assumptions: point
/// loads sit on mesh vertices, the line load is covered by tagged edges and
/// distributed-load rectangles never cut through elements.
class PlateProblem {
 public:
  std::shared_ptr<const Mesh> mesh;
  Material material;
  LoadSpec loads;
  bool allow_unconstrained = false;  // pins one vertex instead of rejecting

  PlateProblem(std::shared_ptr<const Mesh> mesh_in, const Material& mat, LoadSpec loads_in,
               bool allow_unconstrained_in = false)
      : mesh(std::move(mesh_in)),
        material(mat),
        loads(std::move(loads_in)),
        allow_unconstrained(allow_unconstrained_in) {
    validate();
  }

  /// Distributed load value on element t (piecewise constant by assumption).
  double distributed_value(int t) const {
    const Vec2 c = mesh->centroid(t);
    double f = 0.0;
    for (const DistributedLoad& d : loads.distributed)
      if (d.contains(c)) f += d.value;
    return f;
  }

  bool has_constrained_boundary() const {
    for (const Edge& e : mesh->edges)
      if (e.tag == EdgeTag::clamped || e.tag == EdgeTag::simply_supported) return true;
    return false;
  }

 private:
  void validate() {
    if (!mesh) throw std::invalid_argument("problem: missing mesh");
    const double tol = mesh->geom_tol;
    for (PointLoad& p : loads.points) {
      p.vertex = mesh->find_vertex(p.at);
      if (p.vertex < 0)
        throw std::invalid_argument("problem: point load is not applied on a mesh vertex");
    }
    if (loads.line) {
      if (loads.line->polyline.size() < 2)
        throw std::invalid_argument("problem: line-load polyline needs at least two points");
      // The mesh must carry matching on_line_load tags covering the polyline.
      double tagged = 0.0;
      for (const Edge& e : mesh->edges)
        if (e.on_line_load) tagged += e.length;
      double want = 0.0;
      for (std::size_t s = 0; s + 1 < loads.line->polyline.size(); ++s)
        want += norm(loads.line->polyline[s + 1] - loads.line->polyline[s]);
      if (std::abs(tagged - want) > 1e-6 * std::max(1.0, want))
        throw std::invalid_argument("problem: line load is not covered by tagged mesh edges");
    }
    for (const DistributedLoad& d : loads.distributed) {
      if (d.whole_domain) continue;
      if (!(d.xmax > d.xmin && d.ymax > d.ymin))
        throw std::invalid_argument("problem: empty distributed-load rectangle");
      for (const Triangle& t : mesh->triangles) {
        const bool inside = d.contains_strict(mesh->centroid(t.id), tol);
        int out = 0;
        for (int k = 0; k < 3; ++k) {
          const Vec2 p = mesh->tri_vertex_pos(t.id, k);
          if (inside && !d.contains(p, tol)) ++out;
          if (!inside && d.contains_strict(p, tol)) ++out;
        }
        if (out > 0)
          throw std::invalid_argument(
              "problem: distributed-load rectangle cuts through element " + std::to_string(t.id) +
              " (region boundaries must follow mesh edges)");
      }
    }
    if (!allow_unconstrained && !has_constrained_boundary())
      throw std::invalid_argument(
          "problem: boundary is free everywhere (singular problem); "
          "set allow_unconstrained to pin a vertex instead");
  }
};

/// Pointwise mechanical quantities in an edge frame (n, s).
struct PointMechanics {
  SymMat2 moment{};                 // M = (d^3/12) E K(u), K(u) = -Hess u
  double q_n = 0.0;                 // normal shear, (div M) . n
  double M_nn = 0.0;                // normal moment
  double M_ns = 0.0;                // twisting moment
  double dMns_ds = 0.0;             // tangential derivative of M_ns
  double V_n = 0.0;                 // Kirchhoff shear q_n + d M_ns / ds
  std::optional<double> plate_operator;  // D laplacian^2 u, needs 4th derivatives
};

/// Moments, shear resultants and the Kirchhoff shear from a derivative
/// bundle. Requires third derivatives; fills plate_operator when fourth
/// derivatives are present.
inline PointMechanics pointwise_mechanics(const DerivativeBundle& d, const Material& mat, Vec2 n,
                                          Vec2 s) {
  if (d.max_order < 3)
    throw std::invalid_argument("pointwise_mechanics: needs derivatives up to order 3");
  const double c = mat.d3_over_12();
  PointMechanics out;

  const SymMat2 hess{d.d2[0], d.d2[1], d.d2[2]};
  const SymMat2 eh = constitutive_apply(hess, mat);
  out.moment = {-c * eh.xx, -c * eh.xy, -c * eh.yy};

  // Derivatives of M: apply the (linear) constitutive map to the
  // differentiated Hessian.
  const SymMat2 hx{d.d3[0], d.d3[1], d.d3[2]};  // d/dx of (uxx, uxy, uyy)
  const SymMat2 hy{d.d3[1], d.d3[2], d.d3[3]};
  const SymMat2 mx_e = constitutive_apply(hx, mat);
  const SymMat2 my_e = constitutive_apply(hy, mat);
  const SymMat2 Mx{-c * mx_e.xx, -c * mx_e.xy, -c * mx_e.yy};
  const SymMat2 My{-c * my_e.xx, -c * my_e.xy, -c * my_e.yy};

  const double Qx = Mx.xx + My.xy;  // row divergence of M
  const double Qy = Mx.xy + My.yy;
  out.q_n = Qx * n.x + Qy * n.y;

  const double Mn_x = out.moment.xx * n.x + out.moment.xy * n.y;
  const double Mn_y = out.moment.xy * n.x + out.moment.yy * n.y;
  out.M_nn = n.x * Mn_x + n.y * Mn_y;
  out.M_ns = s.x * Mn_x + s.y * Mn_y;

  auto mns_of = [&](const SymMat2& M) {
    const double mx = M.xx * n.x + M.xy * n.y;
    const double my = M.xy * n.x + M.yy * n.y;
    return s.x * mx + s.y * my;
  };
  out.dMns_ds = s.x * mns_of(Mx) + s.y * mns_of(My);
  out.V_n = out.q_n + out.dMns_ds;

  if (d.max_order >= 4)
    out.plate_operator = mat.bending_stiffness() * d.bilaplacian();
  return out;
}

}  // namespace platefem
