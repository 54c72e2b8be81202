#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <span>
#include <stdexcept>

#include "platefem/dofmap.hpp"
#include "platefem/mesh.hpp"
#include "platefem/quadrature.hpp"

namespace platefem {

inline constexpr int kElementDofs = 21;

enum class DofKind {
  vertex_value,
  vertex_dx,
  vertex_dy,
  vertex_dxx,
  vertex_dxy,
  vertex_dyy,
  edge_normal
};

struct DofKey {
  DofKind kind = DofKind::vertex_value;
  int anchor = -1;  // vertex id or edge id
};

inline int derivative_order(DofKind k) {
  switch (k) {
    case DofKind::vertex_value: return 0;
    case DofKind::vertex_dx:
    case DofKind::vertex_dy:
    case DofKind::edge_normal: return 1;
    default: return 2;
  }
}

/// Value and distinct partial derivatives up to fourth order at one point.
/// Mixed partials are symmetric, so only distinct entries are stored:
/// d2 = (xx, xy, yy), d3 = (xxx, xxy, xyy, yyy),
/// d4 = (xxxx, xxxy, xxyy, xyyy, yyyy).
struct DerivativeBundle {
  double value = 0.0;
  std::array<double, 2> d1{};
  std::array<double, 3> d2{};
  std::array<double, 4> d3{};
  std::array<double, 5> d4{};
  int max_order = 0;

  double laplacian() const { return d2[0] + d2[2]; }
  double bilaplacian() const { return d4[0] + 2.0 * d4[2] + d4[4]; }
};

namespace detail {

struct Monomial {
  int a = 0, b = 0;
};

/// The 21 monomials of P5, graded by total degree.
inline constexpr std::array<Monomial, kElementDofs> kP5 = [] {
  std::array<Monomial, kElementDofs> m{};
  int i = 0;
  for (int deg = 0; deg <= 5; ++deg)
    for (int a = deg; a >= 0; --a) m[i++] = {a, deg - a};
  return m;
}();

inline double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

/// d^{p+q}/dx^p dy^q of x^a y^b evaluated at (x, y).
inline double monomial_derivative(Monomial m, int p, int q, double x, double y) {
  if (p > m.a || q > m.b) return 0.0;
  double c = 1.0;
  for (int i = 0; i < p; ++i) c *= m.a - i;
  for (int i = 0; i < q; ++i) c *= m.b - i;
  return c * ipow(x, m.a - p) * ipow(y, m.b - q);
}

/// Row of all 21 monomial derivatives d^{p+q}/dx^p dy^q at (x, y).
inline Eigen::Matrix<double, kElementDofs, 1> monomial_derivative_row(int p, int q, double x,
                                                                      double y) {
  Eigen::Matrix<double, kElementDofs, 1> row;
  for (int j = 0; j < kElementDofs; ++j) row(j) = monomial_derivative(kP5[j], p, q, x, y);
  return row;
}

inline constexpr std::array<std::pair<int, int>, 15> kDerivOrders = {{
    {0, 0},                                          // value
    {1, 0}, {0, 1},                                  // gradient
    {2, 0}, {1, 1}, {0, 2},                          // hessian
    {3, 0}, {2, 1}, {1, 2}, {0, 3},                  // third
    {4, 0}, {3, 1}, {2, 2}, {1, 3}, {0, 4},          // fourth
}};

}  // namespace detail

/// Quintic Argyris element in a local frame centered at the centroid and
/// scaled by the element diameter. The basis is dual to: value, gradient and
/// Hessian at the vertices plus the normal slope at the edge midpoints, the
/// normals being the mesh-canonical edge normals so that both neighbors of an
/// edge share the same functional.
class ElementBasis {
 public:
  int triangle = -1;
  Vec2 center{};
  double scale = 1.0;
  double cond_estimate = 0.0;  // of the scaled functional matrix
  std::array<DofKey, kElementDofs> keys{};
  // Row i holds the local-frame monomial coefficients of basis function i.
  Eigen::Matrix<double, kElementDofs, kElementDofs> coeff;

  Vec2 to_local(Vec2 p) const { return {(p.x - center.x) / scale, (p.y - center.y) / scale}; }

  /// Derivatives of all basis functions for one derivative multi-index.
  Eigen::Matrix<double, kElementDofs, 1> derivative_values(Vec2 p, int dx, int dy) const {
    const Vec2 xi = to_local(p);
    const double chain = detail::ipow(1.0 / scale, dx + dy);
    return chain * (coeff * detail::monomial_derivative_row(dx, dy, xi.x, xi.y));
  }

  Eigen::Matrix<double, kElementDofs, 1> values(Vec2 p) const { return derivative_values(p, 0, 0); }

  /// Local monomial coefficients of the field with local dof values `u`.
  Eigen::Matrix<double, kElementDofs, 1> local_polynomial(
      const Eigen::Matrix<double, kElementDofs, 1>& u) const {
    return coeff.transpose() * u;
  }

  /// Evaluates a local polynomial (monomial coefficients in the element
  /// frame) and its physical derivatives up to max_order <= 4.
  DerivativeBundle eval_polynomial(const Eigen::Matrix<double, kElementDofs, 1>& poly, Vec2 p,
                                   int max_order) const {
    if (max_order < 0 || max_order > 4)
      throw std::invalid_argument("eval_polynomial: derivative order must be in [0,4]");
    const Vec2 xi = to_local(p);
    DerivativeBundle out;
    out.max_order = max_order;
    const int n_entries = max_order == 0 ? 1 : (max_order + 1) * (max_order + 2) / 2;
    double* slots[15] = {&out.value,  &out.d1[0], &out.d1[1], &out.d2[0], &out.d2[1],
                         &out.d2[2],  &out.d3[0], &out.d3[1], &out.d3[2], &out.d3[3],
                         &out.d4[0],  &out.d4[1], &out.d4[2], &out.d4[3], &out.d4[4]};
    for (int k = 0; k < n_entries; ++k) {
      const auto [p_ord, q_ord] = detail::kDerivOrders[k];
      const double chain = detail::ipow(1.0 / scale, p_ord + q_ord);
      *slots[k] = chain * poly.dot(detail::monomial_derivative_row(p_ord, q_ord, xi.x, xi.y));
    }
    return out;
  }

  /// Derivative bundles of every basis function at p.
  std::array<DerivativeBundle, kElementDofs> eval_derivatives(Vec2 p, int max_order) const {
    if (max_order < 0 || max_order > 4)
      throw std::invalid_argument("eval_derivatives: derivative order must be in [0,4]");
    std::array<DerivativeBundle, kElementDofs> out;
    const Vec2 xi = to_local(p);
    const int n_entries = max_order == 0 ? 1 : (max_order + 1) * (max_order + 2) / 2;
    for (int k = 0; k < n_entries; ++k) {
      const auto [p_ord, q_ord] = detail::kDerivOrders[k];
      const double chain = detail::ipow(1.0 / scale, p_ord + q_ord);
      const Eigen::Matrix<double, kElementDofs, 1> vals =
          chain * (coeff * detail::monomial_derivative_row(p_ord, q_ord, xi.x, xi.y));
      for (int i = 0; i < kElementDofs; ++i) {
        DerivativeBundle& b = out[i];
        b.max_order = max_order;
        switch (k) {
          case 0: b.value = vals(i); break;
          case 1: b.d1[0] = vals(i); break;
          case 2: b.d1[1] = vals(i); break;
          case 3: b.d2[0] = vals(i); break;
          case 4: b.d2[1] = vals(i); break;
          case 5: b.d2[2] = vals(i); break;
          case 6: b.d3[0] = vals(i); break;
          case 7: b.d3[1] = vals(i); break;
          case 8: b.d3[2] = vals(i); break;
          case 9: b.d3[3] = vals(i); break;
          default: b.d4[k - 10] = vals(i); break;
        }
      }
    }
    return out;
  }

  /// 21 x 3 matrix of basis Hessians (xx, yy, xy columns) at p; the layout
  /// matches the Voigt form of the constitutive matrix.
  Eigen::Matrix<double, kElementDofs, 3> hessians(Vec2 p) const {
    const Vec2 xi = to_local(p);
    const double chain = 1.0 / (scale * scale);
    Eigen::Matrix<double, kElementDofs, 3> B;
    B.col(0) = coeff * detail::monomial_derivative_row(2, 0, xi.x, xi.y);
    B.col(1) = coeff * detail::monomial_derivative_row(0, 2, xi.x, xi.y);
    B.col(2) = coeff * detail::monomial_derivative_row(1, 1, xi.x, xi.y);
    return chain * B;
  }
};

/// Builds the element basis by inverting the 21x21 matrix of dof functionals
/// applied to the scaled local monomials. The scaled frame keeps the matrix
/// condition independent of the element size.
inline ElementBasis build_element_basis(const Mesh& mesh, int t) {
  const Triangle& tri = mesh.triangles[t];
  ElementBasis basis;
  basis.triangle = t;
  basis.center = mesh.centroid(t);
  basis.scale = mesh.h_K[t];
  if (!(mesh.area(t) > 0.0))
    throw std::invalid_argument("element: non-positive area in triangle " + std::to_string(t));

  Eigen::Matrix<double, kElementDofs, kElementDofs> A;
  int r = 0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 xi = basis.to_local(mesh.tri_vertex_pos(t, k));
    A.row(r++) = detail::monomial_derivative_row(0, 0, xi.x, xi.y).transpose();
    A.row(r++) = detail::monomial_derivative_row(1, 0, xi.x, xi.y).transpose();
    A.row(r++) = detail::monomial_derivative_row(0, 1, xi.x, xi.y).transpose();
    A.row(r++) = detail::monomial_derivative_row(2, 0, xi.x, xi.y).transpose();
    A.row(r++) = detail::monomial_derivative_row(1, 1, xi.x, xi.y).transpose();
    A.row(r++) = detail::monomial_derivative_row(0, 2, xi.x, xi.y).transpose();
    basis.keys[6 * k + 0] = {DofKind::vertex_value, tri.v[k]};
    basis.keys[6 * k + 1] = {DofKind::vertex_dx, tri.v[k]};
    basis.keys[6 * k + 2] = {DofKind::vertex_dy, tri.v[k]};
    basis.keys[6 * k + 3] = {DofKind::vertex_dxx, tri.v[k]};
    basis.keys[6 * k + 4] = {DofKind::vertex_dxy, tri.v[k]};
    basis.keys[6 * k + 5] = {DofKind::vertex_dyy, tri.v[k]};
  }
  for (int k = 0; k < 3; ++k) {
    const Edge& e = mesh.edges[tri.edges[k]];
    const Vec2 xi = basis.to_local(e.midpoint);
    A.row(r++) = (e.normal.x * detail::monomial_derivative_row(1, 0, xi.x, xi.y) +
                  e.normal.y * detail::monomial_derivative_row(0, 1, xi.x, xi.y))
                     .transpose();
    basis.keys[18 + k] = {DofKind::edge_normal, e.id};
  }

  Eigen::FullPivLU<Eigen::Matrix<double, kElementDofs, kElementDofs>> lu(A);
  if (!lu.isInvertible()) {
    throw std::runtime_error("element: singular dof functional matrix in triangle " +
                             std::to_string(t) + " (condition estimate " +
                             std::to_string(A.norm() / std::max(lu.rcond(), 1e-300)) + ")");
  }
  // Scaled-frame dual basis, then the h^order scaling back to physical duals.
  const Eigen::Matrix<double, kElementDofs, kElementDofs> inv = lu.inverse();
  basis.cond_estimate = A.cwiseAbs().rowwise().sum().maxCoeff() *
                        inv.cwiseAbs().rowwise().sum().maxCoeff();
  basis.coeff = inv.transpose();
  for (int i = 0; i < kElementDofs; ++i)
    basis.coeff.row(i) *= detail::ipow(basis.scale, derivative_order(basis.keys[i].kind));
  return basis;
}

/// A function with the point data an Argyris interpolant consumes: value,
/// gradient and Hessian (xx, xy, yy).
struct SmoothFunction {
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> gradient;
  std::function<std::array<double, 3>(Vec2)> hessian;
};

/// Nodal interpolation onto the global Argyris space; exact for quintics.
inline Eigen::VectorXd interpolate(const SmoothFunction& f, const Mesh& mesh, const DofMap& dofs) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dofs.size());
  for (const Vertex& v : mesh.vertices) {
    const Vec2 p = v.pos();
    u[dofs.vertex_dof(v.id, 0)] = f.value(p);
    const Vec2 g = f.gradient(p);
    u[dofs.vertex_dof(v.id, 1)] = g.x;
    u[dofs.vertex_dof(v.id, 2)] = g.y;
    const auto h = f.hessian(p);
    u[dofs.vertex_dof(v.id, 3)] = h[0];
    u[dofs.vertex_dof(v.id, 4)] = h[1];
    u[dofs.vertex_dof(v.id, 5)] = h[2];
  }
  for (const Edge& e : mesh.edges) u[dofs.edge_dof(e.id)] = dot(e.normal, f.gradient(e.midpoint));
  return u;
}

}  // namespace platefem
