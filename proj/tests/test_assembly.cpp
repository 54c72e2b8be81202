#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "platefem/assembly.hpp"
#include "platefem/builtin.hpp"
#include "platefem/estimator.hpp"
#include "test_helpers.hpp"

using namespace platefem;
using testutil::Poly2;

namespace {

PlateProblem plain_problem(std::shared_ptr<const Mesh> mesh) {
  LoadSpec loads;
  loads.distributed.push_back({true, 0, 0, 0, 0, 1.0});
  return PlateProblem(std::move(mesh), Material(1.0, 0.3, 1.0), loads);
}

/// Brute-force constraint-count oracle: assemble every relation the boundary
/// conditions dictate into one dense matrix over all dofs and take its rank.
long constrained_count_oracle(const Mesh& mesh, const DofMap& dofs) {
  std::vector<Eigen::VectorXd> rows;
  auto vertex_row = [&](int v, std::array<double, 6> c) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(dofs.size());
    for (int k = 0; k < 6; ++k) row[dofs.vertex_dof(v, k)] = c[k];
    rows.push_back(row);
  };
  for (const Edge& e : mesh.edges) {
    if (e.tag != EdgeTag::clamped && e.tag != EdgeTag::simply_supported) continue;
    const Vec2 s = e.tangent, n = e.normal;
    for (int v : {e.a, e.b}) {
      vertex_row(v, {1, 0, 0, 0, 0, 0});
      vertex_row(v, {0, s.x, s.y, 0, 0, 0});
      vertex_row(v, {0, 0, 0, s.x * s.x, 2 * s.x * s.y, s.y * s.y});
      if (e.tag == EdgeTag::clamped) {
        vertex_row(v, {0, n.x, n.y, 0, 0, 0});
        vertex_row(v, {0, 0, 0, s.x * n.x, s.x * n.y + s.y * n.x, s.y * n.y});
      }
    }
    if (e.tag == EdgeTag::clamped) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(dofs.size());
      row[dofs.edge_dof(e.id)] = 1.0;
      rows.push_back(row);
    }
  }
  if (rows.empty()) return 0;
  Eigen::MatrixXd M(rows.size(), dofs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) M.row(i) = rows[i];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  lu.setThreshold(1e-10);
  return lu.rank();
}

}  // namespace

TEST_CASE("dof map sizes", "[assembly]") {
  REQUIRE(build_dof_map(testutil::square8()).size() == 70);
  REQUIRE(build_dof_map(testutil::single_triangle()).size() == 21);
  REQUIRE(build_dof_map(refine_uniform_red(testutil::square8())).size() == 206);
}

TEST_CASE("stiffness kernel contains the affine functions", "[assembly]") {
  const auto mesh = std::make_shared<const Mesh>(testutil::square8());
  const PlateProblem problem = plain_problem(mesh);
  const DofMap dofs = build_dof_map(*mesh);
  const auto cache = ElementBasisCache::build(*mesh);
  const Eigen::SparseMatrix<double> K = assemble_stiffness(problem, dofs, *cache);

  // Symmetry, relative to the largest entry.
  const Eigen::SparseMatrix<double> Kt = K.transpose();
  double max_entry = 0.0, max_asym = 0.0;
  for (int k = 0; k < K.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it)
      max_entry = std::max(max_entry, std::abs(it.value()));
  const Eigen::SparseMatrix<double> diff = K - Kt;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
      max_asym = std::max(max_asym, std::abs(it.value()));
  REQUIRE(max_asym <= 1e-12 * max_entry);

  for (const Poly2& p : {Poly2::monomial(0, 0), Poly2::monomial(1, 0), Poly2::monomial(0, 1)}) {
    const Eigen::VectorXd u = interpolate(testutil::smooth_function(p), *mesh, dofs);
    REQUIRE((K * u).lpNorm<Eigen::Infinity>() <= 1e-10 * max_entry * u.lpNorm<Eigen::Infinity>());
  }
}

TEST_CASE("bending energy of a cylindrical deflection", "[assembly]") {
  const auto mesh = std::make_shared<const Mesh>(testutil::square8());
  const PlateProblem problem = plain_problem(mesh);
  const DofMap dofs = build_dof_map(*mesh);
  const auto cache = ElementBasisCache::build(*mesh);
  const Eigen::SparseMatrix<double> K = assemble_stiffness(problem, dofs, *cache);
  const Eigen::VectorXd u =
      interpolate(testutil::smooth_function(Poly2::monomial(2, 0, 0.5)), *mesh, dofs);
  // Constant hessian diag(1,0): a(u,u) = (d^3/12) E/(1-nu^2) * area = 1/10.92.
  REQUIRE(u.dot(K * u) == Catch::Approx(1.0 / 10.92).epsilon(1e-12));
}

TEST_CASE("load assembly", "[assembly]") {
  const Material mat(1.0, 0.3, 1.0);

  SECTION("point load hits exactly one coefficient") {
    const auto mesh = std::make_shared<const Mesh>(testutil::square8());
    LoadSpec loads;
    loads.points.push_back({{0.5, 0.5}, 1.0});
    const PlateProblem problem(mesh, mat, loads);
    const DofMap dofs = build_dof_map(*mesh);
    const auto cache = ElementBasisCache::build(*mesh);
    const Eigen::VectorXd b = assemble_load(problem, dofs, *cache);
    const int center = mesh->find_vertex({0.5, 0.5});
    REQUIRE(center >= 0);
    for (long i = 0; i < b.size(); ++i)
      REQUIRE(b[i] == (i == dofs.vertex_dof(center, 0) ? 1.0 : 0.0));
  }

  SECTION("uniform distributed load integrates to the area") {
    const auto mesh = std::make_shared<const Mesh>(testutil::square8());
    const PlateProblem problem = plain_problem(mesh);
    const DofMap dofs = build_dof_map(*mesh);
    const auto cache = ElementBasisCache::build(*mesh);
    const Eigen::VectorXd b = assemble_load(problem, dofs, *cache);
    const Eigen::VectorXd ones =
        interpolate(testutil::smooth_function(Poly2::monomial(0, 0)), *mesh, dofs);
    REQUIRE(b.dot(ones) == Catch::Approx(1.0).epsilon(1e-12));
  }

  SECTION("line load integrates to its length") {
    const CaseSetup setup = make_builtin(BuiltinCase::line);
    const PlateProblem problem = setup.problem();
    const DofMap dofs = build_dof_map(*problem.mesh);
    const auto cache = ElementBasisCache::build(*problem.mesh);
    const Eigen::VectorXd b = assemble_load(problem, dofs, *cache);
    const Eigen::VectorXd ones =
        interpolate(testutil::smooth_function(Poly2::monomial(0, 0)), *problem.mesh, dofs);
    REQUIRE(b.dot(ones) == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("constraint counts match the rank oracle", "[assembly]") {
  SECTION("clamped square") {
    const auto mesh = std::make_shared<const Mesh>(testutil::square8(EdgeTag::clamped));
    const DofMap dofs = build_dof_map(*mesh);
    const ConstraintSet cs = build_constraints(plain_problem(mesh), dofs);
    REQUIRE(constrained_count_oracle(*mesh, dofs) == 52);
    REQUIRE(cs.n_constrained() == 52);
    REQUIRE(cs.n_free == 18);
  }
  SECTION("simply supported square") {
    const auto mesh = std::make_shared<const Mesh>(testutil::square8());
    const DofMap dofs = build_dof_map(*mesh);
    const ConstraintSet cs = build_constraints(plain_problem(mesh), dofs);
    REQUIRE(constrained_count_oracle(*mesh, dofs) == 32);
    REQUIRE(cs.n_constrained() == 32);
    REQUIRE(cs.n_free == 38);
  }
  SECTION("generic meshes agree with the oracle") {
    for (BuiltinCase c : {BuiltinCase::lshape_free, BuiltinCase::lshape_cc}) {
      const CaseSetup setup = make_builtin(c);
      const DofMap dofs = build_dof_map(*setup.mesh);
      const ConstraintSet cs = build_constraints(setup.problem(), dofs);
      REQUIRE(cs.n_constrained() == constrained_count_oracle(*setup.mesh, dofs));
    }
  }
  SECTION("free boundary leaves no relations") {
    const auto mesh = std::make_shared<const Mesh>(testutil::single_triangle());
    REQUIRE(constrained_count_oracle(*mesh, build_dof_map(*mesh)) == 0);
    LoadSpec loads;
    loads.distributed.push_back({true, 0, 0, 0, 0, 1.0});
    const PlateProblem pinned(mesh, Material(1, 0.3, 1), loads, true);
    const ConstraintSet cs = build_constraints(pinned, build_dof_map(*mesh));
    REQUIRE(cs.n_constrained() == 3);  // the explicit pin only
  }
}

TEST_CASE("mapping then applying the relations yields zero", "[assembly]") {
  const auto mesh = std::make_shared<const Mesh>(testutil::square8(EdgeTag::clamped));
  const DofMap dofs = build_dof_map(*mesh);
  const ConstraintSet cs = build_constraints(plain_problem(mesh), dofs);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd reduced(cs.n_free);
  for (long i = 0; i < cs.n_free; ++i) reduced[i] = dist(rng);
  const Eigen::VectorXd full = cs.reduction * reduced;
  for (const auto& rel : cs.vertex_relations) {
    double dotv = 0.0;
    for (int k = 0; k < 6; ++k) dotv += rel.coeff[k] * full[dofs.vertex_dof(rel.vertex, k)];
    REQUIRE(dotv == Catch::Approx(0.0).margin(1e-12));
  }
  for (int e : cs.constrained_edges) REQUIRE(full[dofs.edge_dof(e)] == 0.0);
}

TEST_CASE("solving the point load problem", "[assembly]") {
  const CaseSetup setup = make_builtin(BuiltinCase::point);

  SECTION("zero load gives the zero solution") {
    LoadSpec none;
    none.points.push_back({{0.5, 0.5}, 0.0});
    const PlateProblem problem(setup.mesh, setup.material, none);
    const Solution sol = solve(problem);
    REQUIRE(sol.field.coeffs.lpNorm<Eigen::Infinity>() == 0.0);
  }

  SECTION("center deflection rises monotonically toward the series value") {
    std::shared_ptr<const Mesh> mesh = setup.mesh;
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
      const PlateProblem problem(mesh, setup.material, setup.loads);
      const Solution sol = solve(problem);
      REQUIRE(sol.diag.spd);
      REQUIRE(sol.diag.rel_residual <= 1e-10);
      const double center = sol.value_at_vertex(mesh->find_vertex({0.5, 0.5}));
      REQUIRE(center > prev);
      REQUIRE(center <= 0.1266812 + 1e-6);  // Galerkin underestimates at the load
      prev = center;
      mesh = std::make_shared<const Mesh>(refine_uniform_red(*mesh));
    }
    REQUIRE(prev == Catch::Approx(0.1266812).epsilon(0.02));
  }

  SECTION("doubling the load doubles the solution exactly") {
    const Solution sol1 = solve(setup.problem());
    LoadSpec doubled;
    doubled.points.push_back({{0.5, 0.5}, 2.0});
    const Solution sol2 = solve(PlateProblem(setup.mesh, setup.material, doubled));
    for (Eigen::Index i = 0; i < sol1.field.coeffs.size(); ++i)
      REQUIRE(sol2.field.coeffs[i] == 2.0 * sol1.field.coeffs[i]);
  }
}

TEST_CASE("galerkin orthogonality on random test functions", "[assembly]") {
  const CaseSetup setup = make_builtin(BuiltinCase::point);
  const PlateProblem problem = setup.problem();
  const DofMap dofs = build_dof_map(*problem.mesh);
  const auto cache = ElementBasisCache::build(*problem.mesh);
  const Eigen::SparseMatrix<double> K = assemble_stiffness(problem, dofs, *cache);
  const Eigen::VectorXd b = assemble_load(problem, dofs, *cache);
  const ConstraintSet cs = build_constraints(problem, dofs);
  const Solution sol = solve(K, b, cs, problem.mesh, cache);

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double scale = b.lpNorm<Eigen::Infinity>();
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd reduced(cs.n_free);
    for (long i = 0; i < cs.n_free; ++i) reduced[i] = dist(rng);
    const Eigen::VectorXd v = cs.reduction * reduced;
    const double a_uv = v.dot(K * sol.field.coeffs);
    const double l_v = b.dot(v);
    REQUIRE(std::abs(a_uv - l_v) <= 1e-8 * scale * v.lpNorm<Eigen::Infinity>());
  }
}

TEST_CASE("solution symmetry on a symmetric mesh", "[assembly]") {
  const auto mesh = std::make_shared<const Mesh>(testutil::square8_symmetric());
  LoadSpec loads;
  loads.points.push_back({{0.5, 0.5}, 1.0});
  const Solution sol = solve(PlateProblem(mesh, Material(1.0, 0.3, 1.0), loads));
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> dist(0.02, 0.98);
  for (int trial = 0; trial < 25; ++trial) {
    const Vec2 p{dist(rng), dist(rng)};
    const double v = sol.field.value(p);
    REQUIRE(sol.field.value({p.y, p.x}) == Catch::Approx(v).margin(1e-8));
    REQUIRE(sol.field.value({1.0 - p.x, p.y}) == Catch::Approx(v).margin(1e-8));
    REQUIRE(sol.field.value({p.x, 1.0 - p.y}) == Catch::Approx(v).margin(1e-8));
  }
}

TEST_CASE("solution evaluation at a vertex returns its coefficient", "[assembly]") {
  const CaseSetup setup = make_builtin(BuiltinCase::point);
  const Solution sol = solve(setup.problem());
  for (int v : {0, 4, 8}) {
    const Vec2 p = setup.mesh->vertex_pos(v);
    REQUIRE(evaluate_solution(sol, p, 0).value ==
            Catch::Approx(sol.value_at_vertex(v)).margin(1e-10));
  }
  REQUIRE_THROWS_AS(evaluate_solution(sol, {3.0, 3.0}, 0), std::invalid_argument);
}

TEST_CASE("an unconstrained system is reported as singular", "[assembly]") {
  const auto mesh = std::make_shared<const Mesh>(testutil::single_triangle());
  LoadSpec loads;
  loads.distributed.push_back({true, 0, 0, 0, 0, 1.0});
  const PlateProblem problem(mesh, Material(1.0, 0.3, 1.0), loads, true);
  const DofMap dofs = build_dof_map(*mesh);
  const auto cache = ElementBasisCache::build(*mesh);
  const Eigen::SparseMatrix<double> K = assemble_stiffness(problem, dofs, *cache);
  const Eigen::VectorXd b = assemble_load(problem, dofs, *cache);
  ConstraintSet none;
  none.n_full = dofs.size();
  none.n_free = dofs.size();
  none.reduction.resize(none.n_full, none.n_free);
  none.reduction.setIdentity();
  REQUIRE_THROWS_AS(solve(K, b, none, mesh, cache), std::runtime_error);
}
