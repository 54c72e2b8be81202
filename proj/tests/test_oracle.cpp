#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "platefem/builtin.hpp"
#include "platefem/estimator.hpp"
#include "platefem/oracle.hpp"
#include "test_helpers.hpp"

using namespace platefem;

namespace {

const Material kMat(1.0, 0.3, 1.0);

/// Termwise derivatives of the truncated Navier series; lets the truncated
/// sum itself be interpolated into the Argyris space.
SmoothFunction series_function(const NavierCase& nc, int M) {
  auto coef = [nc](int m, int n) {
    const double sm = (m % 2 == 0) ? 0.0 : ((m / 2) % 2 == 0 ? 1.0 : -1.0);
    const double sn = (n % 2 == 0) ? 0.0 : ((n / 2) % 2 == 0 ? 1.0 : -1.0);
    const double denom = std::pow(static_cast<double>(m) * m + static_cast<double>(n) * n, 2);
    double c = sm * sn / denom;
    if (nc.kind == NavierLoad::line) c *= std::sin(n * M_PI * nc.d) / n;
    if (nc.kind == NavierLoad::square)
      c *= std::sin(m * M_PI * nc.c) * std::sin(n * M_PI * nc.d) / (static_cast<double>(m) * n);
    return c;
  };
  const double pref = nc.kind == NavierLoad::point
                          ? 4.0 * nc.F0 / (nc.material.bending_stiffness() * std::pow(M_PI, 4))
                      : nc.kind == NavierLoad::line
                          ? 8.0 * nc.g0 / (nc.material.bending_stiffness() * std::pow(M_PI, 5))
                          : 16.0 * nc.f0 / (nc.material.bending_stiffness() * std::pow(M_PI, 6));
  SmoothFunction f;
  f.value = [=](Vec2 p) {
    double s = 0.0;
    for (int m = 1; m <= M; ++m)
      for (int n = 1; n <= M; ++n)
        s += coef(m, n) * std::sin(m * M_PI * p.x) * std::sin(n * M_PI * p.y);
    return pref * s;
  };
  f.gradient = [=](Vec2 p) {
    Vec2 g{};
    for (int m = 1; m <= M; ++m)
      for (int n = 1; n <= M; ++n) {
        const double c = coef(m, n);
        g.x += c * m * M_PI * std::cos(m * M_PI * p.x) * std::sin(n * M_PI * p.y);
        g.y += c * n * M_PI * std::sin(m * M_PI * p.x) * std::cos(n * M_PI * p.y);
      }
    return pref * g;
  };
  f.hessian = [=](Vec2 p) {
    std::array<double, 3> h{};
    for (int m = 1; m <= M; ++m)
      for (int n = 1; n <= M; ++n) {
        const double c = coef(m, n);
        const double mm = m * M_PI, nn = n * M_PI;
        h[0] -= c * mm * mm * std::sin(mm * p.x) * std::sin(nn * p.y);
        h[1] += c * mm * nn * std::cos(mm * p.x) * std::cos(nn * p.y);
        h[2] -= c * nn * nn * std::sin(mm * p.x) * std::sin(nn * p.y);
      }
    return std::array<double, 3>{pref * h[0], pref * h[1], pref * h[2]};
  };
  return f;
}

}  // namespace

TEST_CASE("series vanishes on the boundary", "[oracle]") {
  for (const NavierCase& nc :
       {NavierCase::point(1.0, kMat), NavierCase::line(1.0, 1.0 / 3.0, kMat),
        NavierCase::square(1.0, 1.0 / 3.0, 1.0 / 3.0, kMat)}) {
    REQUIRE(navier_deflection(nc, 0.0, 0.3, 50).value == 0.0);
    REQUIRE(navier_deflection(nc, 0.7, 1.0, 50).value == Catch::Approx(0.0).margin(1e-15));
  }
}

TEST_CASE("point-load series is symmetric in x and y", "[oracle]") {
  const NavierCase nc = NavierCase::point(1.0, kMat);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    const double x = dist(rng), y = dist(rng);
    REQUIRE(navier_deflection(nc, x, y, 200).value ==
            Catch::Approx(navier_deflection(nc, y, x, 200).value).margin(1e-14));
  }
}

TEST_CASE("center deflection anchors", "[oracle]") {
  SECTION("double series approaches the published value") {
    const SeriesValue v = navier_deflection(NavierCase::point(1.0, kMat), 0.5, 0.5, 2000);
    REQUIRE(v.value == Catch::Approx(0.1266812).margin(5e-7));
  }
  SECTION("fast single series hits it at one hundred terms") {
    const SeriesValue v = max_deflection_point_load(1.0, kMat, 100);
    REQUIRE(v.value == Catch::Approx(0.1266812).margin(1e-6));
  }
  SECTION("zero load, linearity") {
    REQUIRE(max_deflection_point_load(0.0, kMat, 50).value == 0.0);
    REQUIRE(max_deflection_point_load(2.0, kMat, 50).value ==
            Catch::Approx(2.0 * max_deflection_point_load(1.0, kMat, 50).value).epsilon(1e-15));
  }
}

TEST_CASE("partial sums stay within the reported tail bound", "[oracle]") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> dist(0.1, 0.9);
  const NavierCase cases[] = {NavierCase::point(1.0, kMat), NavierCase::line(1.0, 1.0 / 3.0, kMat),
                              NavierCase::square(1.0, 1.0 / 3.0, 1.0 / 3.0, kMat)};
  for (const NavierCase& nc : cases) {
    for (int i = 0; i < 5; ++i) {
      const double x = dist(rng), y = dist(rng);
      for (int M : {50, 100, 200}) {
        const SeriesValue a = navier_deflection(nc, x, y, M);
        const SeriesValue b = navier_deflection(nc, x, y, 2 * M);
        REQUIRE(std::abs(a.value - b.value) <= a.tail_bound);
        REQUIRE(navier_deflection(nc, x, y, 2 * M).tail_bound < a.tail_bound);
      }
    }
  }
  for (int M : {50, 100, 200}) {
    const SeriesValue a = max_deflection_point_load(1.0, kMat, M);
    const SeriesValue b = max_deflection_point_load(1.0, kMat, 2 * M);
    REQUIRE(std::abs(a.value - b.value) <= a.tail_bound);
    REQUIRE(b.tail_bound < a.tail_bound);
  }
}

TEST_CASE("square load collapses to the line load as c -> 0", "[oracle]") {
  const double c = 1e-3;
  const NavierCase sq = NavierCase::square(1.0 / (2.0 * c), c, 1.0 / 3.0, kMat);
  const NavierCase ln = NavierCase::line(1.0, 1.0 / 3.0, kMat);
  const double vs = navier_deflection(sq, 0.5, 0.5, 400).value;
  const double vl = navier_deflection(ln, 0.5, 0.5, 400).value;
  REQUIRE(vs == Catch::Approx(vl).epsilon(1e-3));
}

TEST_CASE("energy error identity for the point load", "[oracle]") {
  const CaseSetup setup = make_builtin(BuiltinCase::point);

  SECTION("zero solution gives the full energy") {
    auto cache = ElementBasisCache::build(*setup.mesh);
    const DofMap dofs = build_dof_map(*setup.mesh);
    Solution zero{DiscreteField::wrap(setup.mesh, cache, Eigen::VectorXd::Zero(dofs.size())), {}};
    REQUIRE(energy_error_point_load(zero, 1.0, kMat) ==
            Catch::Approx(std::sqrt(0.1266812)).epsilon(1e-5));
  }

  SECTION("published errors along the uniform ladder") {
    std::shared_ptr<const Mesh> mesh = setup.mesh;
    const double expect[] = {0.0334469831818, 0.0169100336631, 0.00843662159162};
    double prev = 1.0;
    for (int level = 0; level < 3; ++level) {
      const Solution sol = solve(PlateProblem(mesh, kMat, setup.loads));
      const double err = energy_error_point_load(sol, 1.0, kMat);
      REQUIRE(err == Catch::Approx(expect[level]).epsilon(1e-5));
      REQUIRE(err < prev);  // finer mesh, smaller error
      prev = err;
      mesh = std::make_shared<const Mesh>(refine_uniform_red(*mesh));
    }
  }
}

TEST_CASE("identity agrees with a two-mesh energy difference", "[oracle]") {
  const CaseSetup setup = make_builtin(BuiltinCase::point);
  const Solution coarse = solve(setup.problem());
  const auto fine_mesh = std::make_shared<const Mesh>(
      refine_uniform_red(refine_uniform_red(*setup.mesh)));
  const Solution fine = solve(PlateProblem(fine_mesh, kMat, setup.loads));

  // a(u_h - u_ref, u_h - u_ref) integrated over the fine mesh, where each
  // fine element lies inside one coarse element.
  const Eigen::Matrix3d W = bending_energy_matrix(kMat);
  const QuadratureRule rule = triangle_quadrature(10);
  double energy2 = 0.0;
  for (int t = 0; t < fine_mesh->n_triangles(); ++t) {
    const int tc = setup.mesh->locate_triangle(fine_mesh->centroid(t));
    REQUIRE(tc >= 0);
    const MappedQuadrature quad =
        map_to_triangle(rule, fine_mesh->tri_vertex_pos(t, 0), fine_mesh->tri_vertex_pos(t, 1),
                        fine_mesh->tri_vertex_pos(t, 2));
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const DerivativeBundle dc = coarse.field.eval_in(tc, quad.points[q], 2);
      const DerivativeBundle df = fine.field.eval_in(t, quad.points[q], 2);
      const Eigen::Vector3d dh(dc.d2[0] - df.d2[0], dc.d2[2] - df.d2[2], dc.d2[1] - df.d2[1]);
      energy2 += quad.weights[q] * dh.dot(W * dh);
    }
  }
  const double identity = energy_error_point_load(coarse, 1.0, kMat);
  REQUIRE(std::sqrt(energy2) == Catch::Approx(identity).epsilon(0.05));
}

TEST_CASE("general energy error", "[oracle]") {
  SECTION("interpolated truncated series is its own solution") {
    const CaseSetup setup = make_builtin(BuiltinCase::point);
    const NavierCase nc = *setup.navier;
    auto cache = ElementBasisCache::build(*setup.mesh);
    const DofMap dofs = build_dof_map(*setup.mesh);
    const Eigen::VectorXd coeffs = interpolate(series_function(nc, 20), *setup.mesh, dofs);
    Solution sol{DiscreteField::wrap(setup.mesh, cache, coeffs), {}};
    // The center is a vertex, so the interpolant matches the truncated sum
    // there exactly and l(u - u_h) collapses.
    REQUIRE(energy_error_general(sol, nc, 20) <= 1e-7);
  }

  SECTION("line-load energy of the zero field, two quadratures") {
    const CaseSetup setup = make_builtin(BuiltinCase::line);
    const NavierCase nc = *setup.navier;
    auto cache = ElementBasisCache::build(*setup.mesh);
    const DofMap dofs = build_dof_map(*setup.mesh);
    Solution zero{DiscreteField::wrap(setup.mesh, cache, Eigen::VectorXd::Zero(dofs.size())), {}};
    const double via_edges = energy_error_general(zero, nc, 150);
    // Dense-sampling oracle for sqrt(<g, u>_S): trapezoid with 2000 panels.
    const int n = 2000;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double y = 1.0 / 6.0 + (2.0 / 3.0) * i / n;
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      acc += w * navier_deflection(nc, 0.5, y, 150).value;
    }
    acc *= (2.0 / 3.0) / n;
    REQUIRE(via_edges == Catch::Approx(std::sqrt(acc)).epsilon(1e-4));
  }

  SECTION("square-load error decreases under refinement") {
    const CaseSetup setup = make_builtin(BuiltinCase::square);
    const Solution s0 = solve(setup.problem());
    const auto finer = std::make_shared<const Mesh>(refine_uniform_red(*setup.mesh));
    const Solution s1 = solve(PlateProblem(finer, kMat, setup.loads));
    const double e0 = energy_error_general(s0, *setup.navier, 120);
    const double e1 = energy_error_general(s1, *setup.navier, 120);
    REQUIRE(e1 < e0);
  }
}
