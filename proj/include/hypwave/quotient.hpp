#pragma once

#include "hypwave/mesh.hpp"

#include <span>
#include <vector>

namespace hypwave {

/// Degrees of freedom of the P1 space on the closed surface: one per interior
/// vertex, one per pair of matched arc vertices, one shared by all corners.
/// Numbering: interior vertices in vertex order, then master-arc classes in
/// (arc, slot) order, the corner class last.
struct DofMap {
  std::vector<int> vertex_to_dof;
  int n_dofs = 0;
  std::vector<int> class_sizes; // per dof: 1, 2 or 8

  int corner_dof() const { return n_dofs - 1; }

  /// Vertex values from dof values.
  std::vector<double> expand(std::span<const double> dofs) const;
  /// Dof values from vertex values, reading each class at its first vertex.
  std::vector<double> restrict_to_dofs(std::span<const double> vertex_values) const;
};

/// Throws ValidationError if an arc vertex has no partner.
DofMap build_dof_map(const Mesh &m);

} // namespace hypwave
