#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <string>
#include <vector>

#include "platefem/field.hpp"
#include "platefem/model.hpp"
#include "platefem/parallel.hpp"
#include "platefem/quadrature.hpp"

namespace platefem {

inline constexpr int kTriangleQuadratureDegree = 10;
inline constexpr int kEdgeQuadratureDegree = 9;

/// Voigt form (xx, yy, xy) of the bending energy density
/// (d^3/12) E Hess(w) : Hess(v); symmetric positive definite for nu < 1/2.
inline Eigen::Matrix3d bending_energy_matrix(const Material& mat) {
  const double r = mat.nu / (1.0 - mat.nu);
  Eigen::Matrix3d W;
  W << 1.0 + r, r, 0.0,
       r, 1.0 + r, 0.0,
       0.0, 0.0, 2.0;
  return (mat.d3_over_12() * mat.E / (1.0 + mat.nu)) * W;
}

inline Eigen::SparseMatrix<double> assemble_stiffness(const PlateProblem& problem,
                                                      const DofMap& dofs,
                                                      const ElementBasisCache& cache) {
  const Mesh& mesh = *problem.mesh;
  const Eigen::Matrix3d W = bending_energy_matrix(problem.material);
  const QuadratureRule rule = triangle_quadrature(kTriangleQuadratureDegree);

  using LocalMatrix = Eigen::Matrix<double, kElementDofs, kElementDofs>;
  std::vector<LocalMatrix> local(mesh.n_triangles());
  parallel_for(mesh.n_triangles(), [&](int t) {
    const ElementBasis& basis = cache.bases[t];
    const MappedQuadrature quad =
        map_to_triangle(rule, mesh.tri_vertex_pos(t, 0), mesh.tri_vertex_pos(t, 1),
                        mesh.tri_vertex_pos(t, 2));
    LocalMatrix Ke = LocalMatrix::Zero();
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const Eigen::Matrix<double, kElementDofs, 3> B = basis.hessians(quad.points[q]);
      Ke.noalias() += quad.weights[q] * B * W * B.transpose();
    }
    local[t] = Ke;
  });

  // Deterministic merge: element contributions inserted in element-id order.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.n_triangles()) * kElementDofs * kElementDofs);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto idx = dofs.element_dofs(mesh, t);
    for (int i = 0; i < kElementDofs; ++i)
      for (int j = 0; j < kElementDofs; ++j)
        triplets.emplace_back(idx[i], idx[j], local[t](i, j));
  }
  Eigen::SparseMatrix<double> K(dofs.size(), dofs.size());
  K.setFromTriplets(triplets.begin(), triplets.end());
  return K;
}

inline Eigen::VectorXd assemble_load(const PlateProblem& problem, const DofMap& dofs,
                                     const ElementBasisCache& cache) {
  const Mesh& mesh = *problem.mesh;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dofs.size());

  const QuadratureRule tri_rule = triangle_quadrature(kTriangleQuadratureDegree);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double f = problem.distributed_value(t);
    if (f == 0.0) continue;
    const auto idx = dofs.element_dofs(mesh, t);
    const MappedQuadrature quad =
        map_to_triangle(tri_rule, mesh.tri_vertex_pos(t, 0), mesh.tri_vertex_pos(t, 1),
                        mesh.tri_vertex_pos(t, 2));
    Eigen::Matrix<double, kElementDofs, 1> be = Eigen::Matrix<double, kElementDofs, 1>::Zero();
    for (std::size_t q = 0; q < quad.points.size(); ++q)
      be += (f * quad.weights[q]) * cache.bases[t].values(quad.points[q]);
    for (int i = 0; i < kElementDofs; ++i) b[idx[i]] += be(i);
  }

  if (problem.loads.line) {
    const double g = problem.loads.line->value;
    const EdgeQuadratureRule edge_rule = edge_quadrature(kEdgeQuadratureDegree);
    for (const Edge& e : mesh.edges) {
      if (!e.on_line_load) continue;
      // The trace is single-valued; integrate against either neighbor.
      const int t = e.tris[0];
      const auto idx = dofs.element_dofs(mesh, t);
      const MappedQuadrature quad =
          map_to_segment(edge_rule, mesh.vertex_pos(e.a), mesh.vertex_pos(e.b));
      Eigen::Matrix<double, kElementDofs, 1> be = Eigen::Matrix<double, kElementDofs, 1>::Zero();
      for (std::size_t q = 0; q < quad.points.size(); ++q)
        be += (g * quad.weights[q]) * cache.bases[t].values(quad.points[q]);
      for (int i = 0; i < kElementDofs; ++i) b[idx[i]] += be(i);
    }
  }

  // Basis duality turns a nodal point load into a single coefficient entry.
  for (const PointLoad& p : problem.loads.points) b[dofs.vertex_dof(p.vertex, 0)] += p.magnitude;
  return b;
}

/// Homogeneous essential constraints, reduced to an explicit null-space map.
/// All relations couple only the six dofs of one vertex (or kill one edge
/// dof), so the rank reduction runs per vertex block.
struct ConstraintSet {
  struct VertexRelation {
    int vertex = -1;
    std::array<double, 6> coeff{};
  };
  std::vector<VertexRelation> vertex_relations;
  std::vector<int> constrained_edges;

  long n_full = 0;
  long n_free = 0;
  Eigen::SparseMatrix<double> reduction;  // full = reduction * reduced

  long n_constrained() const { return n_full - n_free; }
};

namespace detail {

/// Row-reduces the k x 6 relation block; returns the 6 x n_free null-space
/// basis (full block coords from free coords) and the pivot columns.
inline void reduce_vertex_block(std::vector<std::array<double, 6>> rows,
                                Eigen::Matrix<double, 6, Eigen::Dynamic>& basis,
                                std::vector<int>& pivot_cols) {
  constexpr double kTol = 1e-10;  // relative to unit row norms
  for (auto& row : rows) {
    double n = 0.0;
    for (double v : row) n += v * v;
    n = std::sqrt(n);
    if (n > 0.0)
      for (double& v : row) v /= n;
  }
  const int k = static_cast<int>(rows.size());
  int rank = 0;
  pivot_cols.clear();
  for (int col = 0; col < 6 && rank < k; ++col) {
    int piv = -1;
    double best = kTol;
    for (int i = rank; i < k; ++i)
      if (std::abs(rows[i][col]) > best) {
        best = std::abs(rows[i][col]);
        piv = i;
      }
    if (piv < 0) continue;
    std::swap(rows[rank], rows[piv]);
    const double d = rows[rank][col];
    for (int c = 0; c < 6; ++c) rows[rank][c] /= d;
    for (int i = 0; i < k; ++i) {
      if (i == rank) continue;
      const double f = rows[i][col];
      if (f == 0.0) continue;
      for (int c = 0; c < 6; ++c) rows[i][c] -= f * rows[rank][c];
    }
    pivot_cols.push_back(col);
    ++rank;
  }

  std::array<bool, 6> is_pivot{};
  for (int c : pivot_cols) is_pivot[c] = true;
  std::vector<int> free_cols;
  for (int c = 0; c < 6; ++c)
    if (!is_pivot[c]) free_cols.push_back(c);

  basis.resize(6, static_cast<Eigen::Index>(free_cols.size()));
  basis.setZero();
  for (std::size_t j = 0; j < free_cols.size(); ++j) {
    basis(free_cols[j], j) = 1.0;
    // x_pivot = -sum over free columns of the reduced row entries.
    for (int r = 0; r < rank; ++r) basis(pivot_cols[r], j) = -rows[r][free_cols[j]];
  }
}

}  // namespace detail

/// Builds the essential constraints from the boundary tags. Per boundary edge
/// with tangent s and normal n: clamped kills the whole trace and normal
/// slope (u, grad u, d_ss u, d_sn u at the endpoints and the edge dof);
/// simply supported kills the trace only (u, d_s u, d_ss u at the endpoints).
/// Corner vertices accumulate both edges' relations; redundancy is removed by
/// rank reduction.
inline ConstraintSet build_constraints(const PlateProblem& problem, const DofMap& dofs) {
  const Mesh& mesh = *problem.mesh;
  ConstraintSet cs;
  cs.n_full = dofs.size();

  std::vector<std::vector<std::array<double, 6>>> vertex_rows(mesh.n_vertices());
  std::vector<char> edge_fixed(mesh.n_edges(), 0);

  auto add_rows_for_vertex = [&](int v, const Edge& e) {
    const Vec2 s = e.tangent, n = e.normal;
    auto& rows = vertex_rows[v];
    const bool clamped = e.tag == EdgeTag::clamped;
    rows.push_back({1, 0, 0, 0, 0, 0});                                   // u
    rows.push_back({0, s.x, s.y, 0, 0, 0});                               // d_s u
    rows.push_back({0, 0, 0, s.x * s.x, 2 * s.x * s.y, s.y * s.y});       // d_ss u
    if (clamped) {
      rows.push_back({0, n.x, n.y, 0, 0, 0});                             // d_n u
      rows.push_back({0, 0, 0, s.x * n.x, s.x * n.y + s.y * n.x, s.y * n.y});  // d_sn u
    }
  };

  for (const Edge& e : mesh.edges) {
    if (e.tag != EdgeTag::clamped && e.tag != EdgeTag::simply_supported) continue;
    add_rows_for_vertex(e.a, e);
    add_rows_for_vertex(e.b, e);
    if (e.tag == EdgeTag::clamped) edge_fixed[e.id] = 1;
  }

  if (problem.allow_unconstrained && !problem.has_constrained_boundary()) {
    // Pin value and gradient at one vertex to remove the affine kernel.
    vertex_rows[0].push_back({1, 0, 0, 0, 0, 0});
    vertex_rows[0].push_back({0, 1, 0, 0, 0, 0});
    vertex_rows[0].push_back({0, 0, 1, 0, 0, 0});
  }

  std::vector<Eigen::Triplet<double>> triplets;
  long next_free = 0;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (vertex_rows[v].empty()) {
      for (int c = 0; c < 6; ++c)
        triplets.emplace_back(dofs.vertex_dof(v, c), next_free + c, 1.0);
      next_free += 6;
      continue;
    }
    for (const auto& row : vertex_rows[v]) cs.vertex_relations.push_back({v, row});
    Eigen::Matrix<double, 6, Eigen::Dynamic> basis;
    std::vector<int> pivots;
    detail::reduce_vertex_block(vertex_rows[v], basis, pivots);
    for (Eigen::Index j = 0; j < basis.cols(); ++j)
      for (int c = 0; c < 6; ++c)
        if (basis(c, j) != 0.0)
          triplets.emplace_back(dofs.vertex_dof(v, c), next_free + j, basis(c, j));
    next_free += basis.cols();
  }
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (edge_fixed[e]) {
      cs.constrained_edges.push_back(e);
      continue;
    }
    triplets.emplace_back(dofs.edge_dof(e), next_free++, 1.0);
  }

  cs.n_free = next_free;
  cs.reduction.resize(cs.n_full, cs.n_free);
  cs.reduction.setFromTriplets(triplets.begin(), triplets.end());
  return cs;
}

struct SolveDiagnostics {
  std::string method;
  int iterations = 0;
  double rel_residual = 0.0;
  long n_free = 0;
  bool spd = false;
};

struct Solution {
  DiscreteField field;
  SolveDiagnostics diag;

  /// Deflection at a mesh vertex; by duality this is a single coefficient.
  double value_at_vertex(int v) const { return field.coeffs[field.dofs.vertex_dof(v, 0)]; }
};

/// Solves the reduced SPD system: sparse LDLT first, conjugate gradients as
/// the fallback. Throws on an indefinite or singular reduced operator.
inline Solution solve(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& b,
                      const ConstraintSet& cs, std::shared_ptr<const Mesh> mesh,
                      std::shared_ptr<const ElementBasisCache> cache) {
  const Eigen::SparseMatrix<double>& R = cs.reduction;
  const Eigen::SparseMatrix<double> Kred =
      Eigen::SparseMatrix<double>(R.transpose() * K * R).pruned();
  const Eigen::VectorXd bred = R.transpose() * b;

  SolveDiagnostics diag;
  diag.n_free = cs.n_free;
  Eigen::VectorXd x;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kred);
  if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
    x = ldlt.solve(bred);
    // One step of iterative refinement keeps the algebraic residual tiny.
    x += ldlt.solve(bred - Kred * x);
    diag.method = "ldlt";
    diag.spd = true;
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg(Kred);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(20000);
    x = cg.solve(bred);
    if (cg.info() != Eigen::Success)
      throw std::runtime_error(
          "solve: reduced system is singular or indefinite (kernel suspicion: "
          "is the whole boundary free?)");
    diag.method = "cg";
    diag.iterations = static_cast<int>(cg.iterations());
    diag.spd = true;
  }

  const double bnorm = bred.lpNorm<Eigen::Infinity>();
  diag.rel_residual =
      bnorm > 0.0 ? (Kred * x - bred).lpNorm<Eigen::Infinity>() / bnorm : 0.0;

  Solution sol{DiscreteField::wrap(std::move(mesh), std::move(cache), R * x), diag};
  return sol;
}

/// Convenience driver: assembles and solves the given problem.
inline Solution solve(const PlateProblem& problem) {
  auto cache = ElementBasisCache::build(*problem.mesh);
  const DofMap dofs = build_dof_map(*problem.mesh);
  const Eigen::SparseMatrix<double> K = assemble_stiffness(problem, dofs, *cache);
  const Eigen::VectorXd b = assemble_load(problem, dofs, *cache);
  const ConstraintSet cs = build_constraints(problem, dofs);
  return solve(K, b, cs, problem.mesh, cache);
}

inline DerivativeBundle evaluate_solution(const Solution& sol, Vec2 p, int max_order) {
  return sol.field.eval(p, max_order);
}

}  // namespace platefem
