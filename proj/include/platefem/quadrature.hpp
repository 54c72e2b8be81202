#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "platefem/geometry.hpp"

namespace platefem {

/// Quadrature on the reference triangle {x, y >= 0, x + y <= 1}.
/// All weights are positive, all points strictly interior, and the rule is
/// exact for every polynomial of total degree <= degree.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;  // sum to 1/2 (reference measure)
  int degree = 0;
};

/// Quadrature on the reference interval [0, 1]; weights sum to 1.
struct EdgeQuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1], computed by Newton iteration on
/// the three-term recurrence. Accurate to machine precision for moderate n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

}  // namespace detail

inline constexpr int kMaxQuadratureDegree = 60;

inline EdgeQuadratureRule edge_quadrature(int degree) {
  if (degree < 1 || degree > kMaxQuadratureDegree)
    throw std::invalid_argument("edge_quadrature: unsupported degree " + std::to_string(degree));
  const int n = degree / 2 + 1;  // exact to 2n-1 >= degree
  std::vector<double> x, w;
  detail::gauss_legendre(n, x, w);
  EdgeQuadratureRule rule;
  rule.degree = 2 * n - 1;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.points[i] = 0.5 * (x[i] + 1.0);
    rule.weights[i] = 0.5 * w[i];
  }
  return rule;
}

/// Conical-product rule: the square [0,1]^2 collapsed onto the triangle via
/// (u, v) -> (u(1-v), v) with Jacobian (1-v) folded into the weights.
inline QuadratureRule triangle_quadrature(int degree) {
  if (degree < 1 || degree > kMaxQuadratureDegree)
    throw std::invalid_argument("triangle_quadrature: unsupported degree " + std::to_string(degree));
  const int nu = degree / 2 + 1;        // u-degree <= degree
  const int nv = (degree + 1) / 2 + 1;  // v-degree <= degree + 1 (Jacobian)
  std::vector<double> xu, wu, xv, wv;
  detail::gauss_legendre(nu, xu, wu);
  detail::gauss_legendre(nv, xv, wv);
  QuadratureRule rule;
  rule.degree = degree;
  rule.points.reserve(nu * nv);
  rule.weights.reserve(nu * nv);
  for (int j = 0; j < nv; ++j) {
    const double v = 0.5 * (xv[j] + 1.0);
    const double wj = 0.5 * wv[j] * (1.0 - v);
    for (int i = 0; i < nu; ++i) {
      const double u = 0.5 * (xu[i] + 1.0);
      rule.points.push_back({u * (1.0 - v), v});
      rule.weights.push_back(0.5 * wu[i] * wj);
    }
  }
  return rule;
}

/// Maps a reference-triangle rule onto the physical triangle (a, b, c).
/// Physical weights sum to the triangle area.
struct MappedQuadrature {
  std::vector<Vec2> points;
  std::vector<double> weights;
};

inline MappedQuadrature map_to_triangle(const QuadratureRule& rule, Vec2 a, Vec2 b, Vec2 c) {
  MappedQuadrature out;
  const double jac = signed_area2(a, b, c);  // = 2 * area
  out.points.reserve(rule.points.size());
  out.weights.reserve(rule.points.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Vec2 p = rule.points[q];
    out.points.push_back(a + p.x * (b - a) + p.y * (c - a));
    out.weights.push_back(rule.weights[q] * jac);
  }
  return out;
}

inline MappedQuadrature map_to_segment(const EdgeQuadratureRule& rule, Vec2 a, Vec2 b) {
  MappedQuadrature out;
  const double len = norm(b - a);
  out.points.reserve(rule.points.size());
  out.weights.reserve(rule.points.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    out.points.push_back(a + rule.points[q] * (b - a));
    out.weights.push_back(rule.weights[q] * len);
  }
  return out;
}

}  // namespace platefem
