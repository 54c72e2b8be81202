#pragma once

#include <cmath>
#include <stdexcept>

#include "platefem/assembly.hpp"
#include "platefem/model.hpp"

namespace platefem {

/// Navier series benchmarks: simply supported unit square with a load
/// centered at (1/2, 1/2).
enum class NavierLoad { point, line, square };

struct NavierCase {
  NavierLoad kind = NavierLoad::point;
  Material material;
  double F0 = 0.0;            // point load magnitude
  double g0 = 0.0, d = 0.0;   // line load density and half-length
  double f0 = 0.0, c = 0.0;   // square load density and half-widths (c, d)

  static NavierCase point(double F0, const Material& m) {
    NavierCase nc;
    nc.kind = NavierLoad::point;
    nc.F0 = F0;
    nc.material = m;
    return nc;
  }
  static NavierCase line(double g0, double d, const Material& m) {
    if (!(d > 0.0 && d <= 0.5)) throw std::invalid_argument("navier: need 0 < d <= 1/2");
    NavierCase nc;
    nc.kind = NavierLoad::line;
    nc.g0 = g0;
    nc.d = d;
    nc.material = m;
    return nc;
  }
  static NavierCase square(double f0, double c, double d, const Material& m) {
    if (!(c > 0.0 && c <= 0.5 && d > 0.0 && d <= 0.5))
      throw std::invalid_argument("navier: need 0 < c,d <= 1/2");
    NavierCase nc;
    nc.kind = NavierLoad::square;
    nc.f0 = f0;
    nc.c = c;
    nc.d = d;
    nc.material = m;
    return nc;
  }
};

struct SeriesValue {
  double value = 0.0;
  int terms = 0;
  double tail_bound = 0.0;
};

namespace detail {

/// sin(m pi / 2) without trigonometric roundoff: 0, 1, 0, -1, ...
inline double sin_half_pi(int m) {
  if (m % 2 == 0) return 0.0;
  return (m / 2) % 2 == 0 ? 1.0 : -1.0;
}

inline double navier_prefactor(const NavierCase& nc) {
  const double D = nc.material.bending_stiffness();
  switch (nc.kind) {
    case NavierLoad::point: return 4.0 * nc.F0 / (D * std::pow(M_PI, 4));
    case NavierLoad::line: return 8.0 * nc.g0 / (D * std::pow(M_PI, 5));
    case NavierLoad::square: return 16.0 * nc.f0 / (D * std::pow(M_PI, 6));
  }
  return 0.0;
}

}  // namespace detail

/// Partial double sine series for the deflection at (x, y), summed in
/// ascending (m, n) order. The tail bound follows from comparison with
/// sum 1/(m^2+n^2)^2 over the discarded index range.
inline SeriesValue navier_deflection(const NavierCase& nc, double x, double y, int M) {
  if (M < 1) throw std::invalid_argument("navier_deflection: need M >= 1");
  const double pref = detail::navier_prefactor(nc);
  double sum = 0.0;
  for (int m = 1; m <= M; ++m) {
    const double sm = detail::sin_half_pi(m);
    if (sm == 0.0) continue;
    const double fm = nc.kind == NavierLoad::square ? std::sin(m * M_PI * nc.c) : 1.0;
    if (fm == 0.0) continue;
    const double sx = std::sin(m * M_PI * x);
    for (int n = 1; n <= M; ++n) {
      const double sn = detail::sin_half_pi(n);
      if (sn == 0.0) continue;
      const double denom = static_cast<double>(m) * m + static_cast<double>(n) * n;
      double coef = sm * sn / (denom * denom);
      switch (nc.kind) {
        case NavierLoad::point: break;
        case NavierLoad::line: coef *= std::sin(n * M_PI * nc.d) / n; break;
        case NavierLoad::square: coef *= fm * std::sin(n * M_PI * nc.d) / (static_cast<double>(m) * n); break;
      }
      sum += coef * sx * std::sin(n * M_PI * y);
    }
  }
  SeriesValue out;
  out.value = pref * sum;
  out.terms = M;
  out.tail_bound = std::abs(pref) * M_PI / (4.0 * static_cast<double>(M) * M);
  return out;
}

/// Center deflection for the point load through the fast single series
/// u(1/2,1/2) = F0/(2 D pi^3) sum_m (sin(m pi/2))^2 (sinh(m pi) - m pi) /
/// (m^3 (1 + cosh(m pi))). The hyperbolic ratio is evaluated in the
/// exponentially scaled form (1 - e^{-2t} - 2t e^{-t}) / (1 + e^{-t})^2 and
/// equals one to machine precision beyond small m, so the remaining tail is
/// completed in closed form via sum over odd m of 1/m^3 = 7 zeta(3)/8.
inline SeriesValue max_deflection_point_load(double F0, const Material& mat, int M) {
  if (M < 1) throw std::invalid_argument("max_deflection_point_load: need M >= 1");
  constexpr double kOddInverseCubes = 7.0 / 8.0 * 1.2020569031595942854;  // 7 zeta(3) / 8
  const double C = F0 / (2.0 * mat.bending_stiffness() * std::pow(M_PI, 3));
  double sum = 0.0;
  double inv_cubes = 0.0;
  for (int m = 1; m <= M; m += 2) {
    const double t = m * M_PI;
    const double e = std::exp(-t);
    const double ratio = (1.0 - e * e - 2.0 * t * e) / ((1.0 + e) * (1.0 + e));
    const double m3 = static_cast<double>(m) * m * m;
    sum += ratio / m3;
    inv_cubes += 1.0 / m3;
  }
  SeriesValue out;
  out.value = C * (sum + (kOddInverseCubes - inv_cubes));
  out.terms = M;
  const double t1 = (M + 1) * M_PI;
  out.tail_bound = std::abs(C) * (4.0 * (t1 + 2.0) * std::exp(-t1) + 1e-13 / M);
  return out;
}

/// Energy-norm error of a point-load solution through the identity
/// |||u - u_h||| = sqrt(F0 (u(1/2,1/2) - u_h(1/2,1/2))).
inline double energy_error_point_load(const Solution& sol, double F0, const Material& mat,
                                      int M = 100) {
  const int v = sol.field.mesh->find_vertex({0.5, 0.5});
  if (v < 0)
    throw std::invalid_argument("energy_error_point_load: center (1/2,1/2) is not a mesh vertex");
  const double u_exact = max_deflection_point_load(F0, mat, M).value;
  const double radicand = F0 * (u_exact - sol.value_at_vertex(v));
  const double scale = std::max(1.0, std::abs(F0 * u_exact));
  if (radicand < -1e-12 * scale)
    throw std::runtime_error("energy_error_point_load: negative radicand " +
                             std::to_string(radicand) + " (solver or problem mismatch)");
  return std::sqrt(std::max(radicand, 0.0));
}

/// Energy-norm error via |||u - u_h||| = sqrt(l(u - u_h)) with the exact
/// deflection from the Navier series at the quadrature points. Cost is
/// O(M^2) per point; meant for diagnostics, not tight tolerances: once the
/// finite element error drops below the series truncation the radicand is
/// pure truncation noise and is clamped to zero.
inline double energy_error_general(const Solution& sol, const NavierCase& nc, int M = 200,
                                   int quad_degree = kTriangleQuadratureDegree) {
  const Mesh& mesh = *sol.field.mesh;
  // |l(u - u_h)| picks up at most |load mass| * series-tail of truncation noise.
  const double tail = std::abs(detail::navier_prefactor(nc)) * M_PI / (4.0 * static_cast<double>(M) * M);
  double load_mass = 0.0;
  switch (nc.kind) {
    case NavierLoad::point: load_mass = std::abs(nc.F0); break;
    case NavierLoad::line: load_mass = std::abs(nc.g0) * 2.0 * nc.d; break;
    case NavierLoad::square: load_mass = std::abs(nc.f0) * 4.0 * nc.c * nc.d; break;
  }
  const double noise = load_mass * tail + 1e-12;
  double l = 0.0;
  switch (nc.kind) {
    case NavierLoad::point: {
      const int v = mesh.find_vertex({0.5, 0.5});
      if (v < 0) throw std::invalid_argument("energy_error_general: center is not a mesh vertex");
      l = nc.F0 * (navier_deflection(nc, 0.5, 0.5, M).value - sol.value_at_vertex(v));
      break;
    }
    case NavierLoad::square: {
      const QuadratureRule rule = triangle_quadrature(quad_degree);
      for (int t = 0; t < mesh.n_triangles(); ++t) {
        const Vec2 c = mesh.centroid(t);
        if (std::abs(c.x - 0.5) > nc.c || std::abs(c.y - 0.5) > nc.d) continue;
        const auto poly = sol.field.element_polynomial(t);
        const MappedQuadrature quad =
            map_to_triangle(rule, mesh.tri_vertex_pos(t, 0), mesh.tri_vertex_pos(t, 1),
                            mesh.tri_vertex_pos(t, 2));
        for (std::size_t q = 0; q < quad.points.size(); ++q) {
          const double u = navier_deflection(nc, quad.points[q].x, quad.points[q].y, M).value;
          const double uh =
              sol.field.bases->bases[t].eval_polynomial(poly, quad.points[q], 0).value;
          l += nc.f0 * quad.weights[q] * (u - uh);
        }
      }
      break;
    }
    case NavierLoad::line: {
      const EdgeQuadratureRule rule = edge_quadrature(kEdgeQuadratureDegree);
      for (const Edge& e : mesh.edges) {
        if (!e.on_line_load) continue;
        const int t = e.tris[0];
        const auto poly = sol.field.element_polynomial(t);
        const MappedQuadrature quad =
            map_to_segment(rule, mesh.vertex_pos(e.a), mesh.vertex_pos(e.b));
        for (std::size_t q = 0; q < quad.points.size(); ++q) {
          const double u = navier_deflection(nc, quad.points[q].x, quad.points[q].y, M).value;
          const double uh =
              sol.field.bases->bases[t].eval_polynomial(poly, quad.points[q], 0).value;
          l += nc.g0 * quad.weights[q] * (u - uh);
        }
      }
      break;
    }
  }
  if (l < -noise)
    throw std::runtime_error("energy_error_general: negative radicand beyond the series noise");
  return std::sqrt(std::max(l, 0.0));
}

}  // namespace platefem
