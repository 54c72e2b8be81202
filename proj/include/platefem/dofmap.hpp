#pragma once

#include <array>

#include "platefem/mesh.hpp"

namespace platefem {

/// Global Argyris layout: six dofs per vertex (value, dx, dy, dxx, dxy, dyy)
/// followed by one normal-slope dof per edge; N = 6V + E.
struct DofMap {
  int n_vertices = 0;
  int n_edges = 0;

  long size() const { return 6L * n_vertices + n_edges; }
  int vertex_dof(int v, int comp) const { return 6 * v + comp; }
  int edge_dof(int e) const { return 6 * n_vertices + e; }

  /// The 21 global indices of an element's local dofs: vertex blocks in local
  /// vertex order, then the three edge dofs in local edge-slot order.
  std::array<int, 21> element_dofs(const Mesh& m, int t) const {
    const Triangle& tri = m.triangles[t];
    std::array<int, 21> idx;
    for (int k = 0; k < 3; ++k)
      for (int c = 0; c < 6; ++c) idx[6 * k + c] = vertex_dof(tri.v[k], c);
    for (int k = 0; k < 3; ++k) idx[18 + k] = edge_dof(tri.edges[k]);
    return idx;
  }
};

inline DofMap build_dof_map(const Mesh& m) {
  return DofMap{m.n_vertices(), m.n_edges()};
}

}  // namespace platefem
