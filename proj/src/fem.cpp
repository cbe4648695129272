#include "hypwave/fem.hpp"

#include "hypwave/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace hypwave {

DampingFunction no_damping() {
  return [](Complex) { return 0.0; };
}

DampingFunction annulus_damping(double r0, double value) {
  return [r0, value](Complex z) { return std::abs(z) >= r0 ? value : 0.0; };
}

ElementMatrices local_element_matrices(const std::array<Complex, 3> &tri,
                                       const DampingFunction &damping) {
  const Complex &p0 = tri[0], &p1 = tri[1], &p2 = tri[2];
  const double det = (p1.real() - p0.real()) * (p2.imag() - p0.imag()) -
                     (p1.imag() - p0.imag()) * (p2.real() - p0.real());
  if (!(std::abs(det) > 0.0) || !std::isfinite(det))
    throw ValidationError(fmt::format(
        "degenerate triangle ({:.6g}, {:.6g}) ({:.6g}, {:.6g}) ({:.6g}, {:.6g})",
        p0.real(), p0.imag(), p1.real(), p1.imag(), p2.real(), p2.imag()));
  const double area = 0.5 * std::abs(det);

  ElementMatrices e;

  // grad e_i = (b_i, c_i) / det
  std::array<double, 3> b, c;
  for (int i = 0; i < 3; ++i) {
    const Complex &q1 = tri[(i + 1) % 3];
    const Complex &q2 = tri[(i + 2) % 3];
    b[i] = q1.imag() - q2.imag();
    c[i] = q2.real() - q1.real();
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      e.stiffness[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);

  // Midpoint of the edge opposite vertex k: e_k = 0 there, the other two
  // basis functions are 1/2.
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3;
    const int j = (k + 2) % 3;
    const Complex mid = 0.5 * (tri[i] + tri[j]);
    const double w = area / 3.0 * area_density(mid);
    const double wm = 0.25 * w;
    const double wd = wm * damping(mid);
    for (int r : {i, j})
      for (int s : {i, j}) {
        e.mass[r][s] += wm;
        e.damping[r][s] += wd;
      }
  }
  return e;
}

AssembledSystem assemble(const Mesh &m, const DofMap &dm,
                         const DampingFunction &damping) {
  std::vector<std::pair<int, int>> pattern;
  pattern.reserve(m.triangles.size() * 6);
  for (const Triangle &t : m.triangles)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j)
        pattern.emplace_back(dm.vertex_to_dof[t[i]], dm.vertex_to_dof[t[j]]);

  AssembledSystem sys;
  sys.mass = SparseSymMatrix::from_pattern(dm.n_dofs, std::move(pattern));
  sys.damping = sys.mass;
  sys.stiffness = sys.mass;

  for (const Triangle &t : m.triangles) {
    const std::array<Complex, 3> tri = {m.points[t[0]].z(), m.points[t[1]].z(),
                                        m.points[t[2]].z()};
    const ElementMatrices e = local_element_matrices(tri, damping);
    for (int i = 0; i < 3; ++i) {
      const int di = dm.vertex_to_dof[t[i]];
      for (int j = 0; j < 3; ++j) {
        const int dj = dm.vertex_to_dof[t[j]];
        // Pairs with di < dj are the upper mirror of (dj, di).
        if (di < dj)
          continue;
        const long k = sys.mass.find(di, dj);
        sys.mass.values()[k] += e.mass[i][j];
        sys.damping.values()[k] += e.damping[i][j];
        sys.stiffness.values()[k] += e.stiffness[i][j];
      }
    }
  }
  sys.damped = sys.damping.max_abs() > 0.0;
  return sys;
}

} // namespace hypwave
