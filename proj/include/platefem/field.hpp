#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <vector>

#include "platefem/dofmap.hpp"
#include "platefem/element.hpp"
#include "platefem/mesh.hpp"
#include "platefem/parallel.hpp"

namespace platefem {

/// Per-element Argyris bases of one mesh, built once and shared between
/// assembly and the error estimator.
struct ElementBasisCache {
  std::vector<ElementBasis> bases;

  static std::shared_ptr<const ElementBasisCache> build(const Mesh& mesh) {
    auto cache = std::make_shared<ElementBasisCache>();
    cache->bases.resize(mesh.n_triangles());
    parallel_for(mesh.n_triangles(),
                 [&](int t) { cache->bases[t] = build_element_basis(mesh, t); });
    return cache;
  }
};

/// A coefficient vector over the global Argyris layout, evaluable anywhere in
/// the domain through the element bases.
struct DiscreteField {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const ElementBasisCache> bases;
  DofMap dofs;
  Eigen::VectorXd coeffs;

  static DiscreteField wrap(std::shared_ptr<const Mesh> mesh,
                            std::shared_ptr<const ElementBasisCache> bases,
                            Eigen::VectorXd coeffs) {
    DiscreteField f;
    f.mesh = std::move(mesh);
    f.bases = std::move(bases);
    f.dofs = build_dof_map(*f.mesh);
    f.coeffs = std::move(coeffs);
    if (f.coeffs.size() != f.dofs.size())
      throw std::invalid_argument("field: coefficient vector does not match the dof layout");
    return f;
  }

  Eigen::Matrix<double, kElementDofs, 1> element_coeffs(int t) const {
    const auto idx = dofs.element_dofs(*mesh, t);
    Eigen::Matrix<double, kElementDofs, 1> u;
    for (int i = 0; i < kElementDofs; ++i) u(i) = coeffs[idx[i]];
    return u;
  }

  /// Local monomial coefficients of the restriction to element t.
  Eigen::Matrix<double, kElementDofs, 1> element_polynomial(int t) const {
    return bases->bases[t].local_polynomial(element_coeffs(t));
  }

  DerivativeBundle eval_in(int t, Vec2 p, int max_order) const {
    return bases->bases[t].eval_polynomial(element_polynomial(t), p, max_order);
  }

  DerivativeBundle eval(Vec2 p, int max_order) const {
    const int t = mesh->locate_triangle(p);
    if (t < 0) throw std::invalid_argument("field: evaluation point lies outside the mesh");
    return eval_in(t, p, max_order);
  }

  double value(Vec2 p) const { return eval(p, 0).value; }
};

}  // namespace platefem
