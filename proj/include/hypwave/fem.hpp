/**
 * @file fem.hpp
 * @brief Galerkin matrices of the damped wave equation on the octagon.
 *
 * With P1 basis functions e_i expressed in quotient dofs:
 *   M_ij = int 4/(1-|z|^2)^2 e_i e_j,
 *   D_ij = int 4 a(z)/(1-|z|^2)^2 e_i e_j,
 *   K_ij = int grad e_i . grad e_j   (Euclidean gradients; conformal invariance
 *                                     makes this the Dirichlet form).
 * Mass and damping use the three-edge-midpoint rule, stiffness is exact.
 */
#pragma once

#include "hypwave/mesh.hpp"
#include "hypwave/quotient.hpp"
#include "hypwave/sparse.hpp"

#include <array>
#include <functional>

namespace hypwave {

using DampingFunction = std::function<double(Complex)>;

DampingFunction no_damping();
/// value for |z| >= r0, zero inside.
DampingFunction annulus_damping(double r0, double value);

using Matrix3 = std::array<std::array<double, 3>, 3>;

struct ElementMatrices {
  Matrix3 mass{};
  Matrix3 damping{};
  Matrix3 stiffness{};
};

/// Throws ValidationError for a degenerate triangle.
ElementMatrices local_element_matrices(const std::array<Complex, 3> &tri,
                                       const DampingFunction &damping);

struct AssembledSystem {
  SparseSymMatrix mass;
  SparseSymMatrix damping;
  SparseSymMatrix stiffness;
  bool damped = false; // false when the damping matrix is identically zero
};

/// Sequential assembly in triangle order into quotient dofs.
AssembledSystem assemble(const Mesh &m, const DofMap &dm,
                         const DampingFunction &damping = no_damping());

} // namespace hypwave
