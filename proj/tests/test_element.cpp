#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "platefem/element.hpp"
#include "platefem/field.hpp"
#include "test_helpers.hpp"

using namespace platefem;
using testutil::Poly2;

namespace {

/// Fornberg finite-difference weights for derivative `order` on the node
/// offsets z (scaled by h afterwards); exact for polynomials of degree
/// < |z|. Independent numerical-differentiation oracle.
std::vector<double> fd_weights(const std::vector<double>& z, int order) {
  const int n = static_cast<int>(z.size()) - 1;
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(order + 1, 0.0));
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = z[0];  // node minus evaluation point (taken as 0)
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = z[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = z[i] - z[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c[i][order];
  return w;
}

/// d^{p+q} f / dx^p dy^q by a tensor finite-difference stencil; the 7-point
/// stencil is exact through degree 6, so quintics differentiate exactly up
/// to roundoff.
double fd_derivative(const Poly2& f, int p, int q, Vec2 at, double h) {
  const std::vector<double> offsets{-3, -2, -1, 0, 1, 2, 3};
  const auto wx = fd_weights(offsets, p);
  const auto wy = fd_weights(offsets, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i)
    for (std::size_t j = 0; j < offsets.size(); ++j)
      sum += wx[i] * wy[j] * f(at.x + offsets[i] * h, at.y + offsets[j] * h);
  return sum / (std::pow(h, p) * std::pow(h, q));
}

DiscreteField interpolant(std::shared_ptr<const Mesh> mesh, const Poly2& p) {
  auto cache = ElementBasisCache::build(*mesh);
  const DofMap dofs = build_dof_map(*mesh);
  return DiscreteField::wrap(mesh, cache, interpolate(testutil::smooth_function(p), *mesh, dofs));
}

}  // namespace

TEST_CASE("dof functionals applied to the basis give the identity", "[element]") {
  const auto mesh = std::make_shared<const Mesh>(testutil::square8());
  for (int t = 0; t < mesh->n_triangles(); ++t) {
    const ElementBasis basis = build_element_basis(*mesh, t);
    for (int i = 0; i < kElementDofs; ++i) {
      for (int j = 0; j < kElementDofs; ++j) {
        const DofKey& key = basis.keys[j];
        double applied = 0.0;
        if (key.kind == DofKind::edge_normal) {
          const Edge& e = mesh->edges[key.anchor];
          const auto g1 = basis.derivative_values(e.midpoint, 1, 0);
          const auto g2 = basis.derivative_values(e.midpoint, 0, 1);
          applied = e.normal.x * g1(i) + e.normal.y * g2(i);
        } else {
          const Vec2 p = mesh->vertex_pos(key.anchor);
          const int dx[] = {0, 1, 0, 2, 1, 0};
          const int dy[] = {0, 0, 1, 0, 1, 2};
          const int comp = static_cast<int>(key.kind);
          applied = basis.derivative_values(p, dx[comp], dy[comp])(i);
        }
        REQUIRE(applied == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-9));
      }
    }
  }
}

TEST_CASE("vertex value basis is one at its vertex and zero at the others", "[element]") {
  const Mesh mesh = testutil::single_triangle();
  const ElementBasis basis = build_element_basis(mesh, 0);
  for (int k = 0; k < 3; ++k) {
    const auto vals = basis.values(mesh.tri_vertex_pos(0, k));
    for (int kk = 0; kk < 3; ++kk)
      REQUIRE(vals(6 * kk) == Catch::Approx(k == kk ? 1.0 : 0.0).margin(1e-12));
  }
}

TEST_CASE("interpolating x^2 reproduces its hessian", "[element]") {
  const auto mesh = std::make_shared<const Mesh>(testutil::square8());
  const DiscreteField f = interpolant(mesh, Poly2::monomial(2, 0));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.05, 0.95);
  for (int i = 0; i < 20; ++i) {
    const Vec2 p{dist(rng), dist(rng)};
    const DerivativeBundle d = f.eval(p, 2);
    REQUIRE(d.value == Catch::Approx(p.x * p.x).margin(1e-12));
    REQUIRE(d.d2[0] == Catch::Approx(2.0).margin(1e-10));
    REQUIRE(d.d2[1] == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(d.d2[2] == Catch::Approx(0.0).margin(1e-10));
  }
}

TEST_CASE("random quintics interpolate exactly", "[element]") {
  const auto mesh = std::make_shared<const Mesh>(testutil::square8());
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const Poly2 p = testutil::random_quintic(rng);
    const DiscreteField f = interpolant(mesh, p);
    double scale = 1.0;
    for (int i = 0; i < 50; ++i) {
      const Vec2 q{dist(rng), dist(rng)};
      scale = std::max(scale, std::abs(p(q)));
      REQUIRE(std::abs(f.eval(q, 0).value - p(q)) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("constant and linear interpolation dof patterns", "[element]") {
  const Mesh mesh = testutil::square8();
  const DofMap dofs = build_dof_map(mesh);

  const Eigen::VectorXd ones = interpolate(testutil::smooth_function(Poly2::monomial(0, 0)), mesh, dofs);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    REQUIRE(ones[dofs.vertex_dof(v, 0)] == 1.0);
    for (int c = 1; c < 6; ++c) REQUIRE(ones[dofs.vertex_dof(v, c)] == 0.0);
  }
  for (int e = 0; e < mesh.n_edges(); ++e) REQUIRE(ones[dofs.edge_dof(e)] == 0.0);

  const Eigen::VectorXd x = interpolate(testutil::smooth_function(Poly2::monomial(1, 0)), mesh, dofs);
  for (int v = 0; v < mesh.n_vertices(); ++v) REQUIRE(x[dofs.vertex_dof(v, 1)] == 1.0);
  for (const Edge& e : mesh.edges) REQUIRE(x[dofs.edge_dof(e.id)] == e.normal.x);
}

TEST_CASE("derivative evaluation is exact polynomial differentiation", "[element]") {
  const auto mesh = std::make_shared<const Mesh>(testutil::square8());

  SECTION("fourth derivatives of a cubic vanish") {
    const DiscreteField f = interpolant(mesh, Poly2::monomial(2, 1));
    const DerivativeBundle d = f.eval({0.3, 0.6}, 4);
    for (double v : d.d4) REQUIRE(v == Catch::Approx(0.0).margin(1e-10));
  }

  SECTION("bilaplacian of x^4 is 24 everywhere") {
    const DiscreteField f = interpolant(mesh, Poly2::monomial(4, 0));
    for (const Vec2 p : {Vec2{0.1, 0.2}, Vec2{0.7, 0.9}, Vec2{0.5, 0.31}})
      REQUIRE(f.eval(p, 4).bilaplacian() == Catch::Approx(24.0).epsilon(1e-10));
  }

  SECTION("random quintic against the finite-difference oracle") {
    std::mt19937 rng(99);
    const Poly2 p = testutil::random_quintic(rng);
    const DiscreteField f = interpolant(mesh, p);
    const Vec2 at{0.35, 0.55};
    const DerivativeBundle d = f.eval(at, 4);
    int entry = 0;
    for (const auto [dx, dy] : detail::kDerivOrders) {
      const double expected = fd_derivative(p, dx, dy, at, 0.05);
      const double got = entry == 0      ? d.value
                         : entry <= 2    ? d.d1[entry - 1]
                         : entry <= 5    ? d.d2[entry - 3]
                         : entry <= 9    ? d.d3[entry - 6]
                                         : d.d4[entry - 10];
      REQUIRE(got == Catch::Approx(expected).epsilon(1e-6).margin(1e-8));
      ++entry;
    }
  }
}

TEST_CASE("global interpolants are C1 across interior edges", "[element]") {
  const auto mesh = std::make_shared<const Mesh>(refine_uniform_red(testutil::square8()));
  std::mt19937 rng(1234);
  const Poly2 p = testutil::random_quintic(rng);
  // Break the global polynomial structure: perturb all coefficients of the
  // interpolant randomly; the glued field must stay C1 regardless.
  DiscreteField f = interpolant(mesh, p);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (Eigen::Index i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] += dist(rng);

  std::uniform_real_distribution<double> tdist(0.05, 0.95);
  for (const Edge& e : mesh->edges) {
    if (e.is_boundary()) continue;
    for (int trial = 0; trial < 10; ++trial) {
      const Vec2 q = mesh->vertex_pos(e.a) + tdist(rng) * (mesh->vertex_pos(e.b) - mesh->vertex_pos(e.a));
      const DerivativeBundle d0 = f.eval_in(e.tris[0], q, 1);
      const DerivativeBundle d1 = f.eval_in(e.tris[1], q, 1);
      const double scale = std::max({1.0, std::abs(d0.value), norm({d0.d1[0], d0.d1[1]})});
      REQUIRE(std::abs(d0.value - d1.value) <= 1e-8 * scale);
      REQUIRE(std::abs(d0.d1[0] - d1.d1[0]) <= 1e-8 * scale);
      REQUIRE(std::abs(d0.d1[1] - d1.d1[1]) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("functional matrix condition stays bounded under refinement", "[element]") {
  Mesh mesh = testutil::square8();
  double prev = 0.0;
  for (int level = 0; level < 3; ++level) {
    double worst = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t)
      worst = std::max(worst, build_element_basis(mesh, t).cond_estimate);
    if (level > 0) REQUIRE(worst < 2.0 * prev);
    prev = worst;
    mesh = refine_uniform_red(mesh);
  }
}

TEST_CASE("degenerate geometry is reported", "[element]") {
  // Build a valid mesh, then flatten one triangle behind the validator's back.
  Mesh mesh = testutil::single_triangle();
  mesh.vertices[2].x = 0.5;
  mesh.vertices[2].y = 0.0;
  REQUIRE_THROWS(build_element_basis(mesh, 0));
}
