// Incremental Bowyer-Watson triangulation used by the mesh generator.
#pragma once

#include <array>
#include <complex>
#include <vector>

namespace hypwave::detail {

/// Delaunay triangulation of `points` (Euclidean). Triangles are returned
/// counterclockwise and reference only input indices (the bounding triangle
/// is stripped). Throws NumericalError if insertion fails.
std::vector<std::array<int, 3>>
delaunay_triangulate(const std::vector<std::complex<double>> &points);

/// Twice the signed area of (a, b, c); positive when counterclockwise.
double orient2d(std::complex<double> a, std::complex<double> b,
                std::complex<double> c);

} // namespace hypwave::detail
