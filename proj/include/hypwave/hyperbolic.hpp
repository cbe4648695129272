/**
 * @file hyperbolic.hpp
 * @brief Poincare-disc geometry for the Bolza octagon.
 *
 * The disc carries the metric 4(dx^2 + dy^2)/(1 - x^2 - y^2)^2. Orientation
 * preserving isometries are stored as SU(1,1) matrices
 * @f$ \begin{pmatrix} a & b \\ \bar b & \bar a \end{pmatrix} @f$ acting by
 * @f$ z \mapsto (a z + b)/(\bar b z + \bar a) @f$.
 *
 * The octagon vertices P_1..P_8 sit at Euclidean radius 2^{-1/4} and angles
 * 157.5, 112.5, ..., -157.5 degrees (clockwise from the upper left). Arc a
 * (0..7) joins P_{a+1} to P_{a+2}; arc a and arc a+4 are paired by a group
 * generator, arcs 0..3 are the masters.
 */
#pragma once

#include <array>
#include <complex>
#include <optional>
#include <utility>

namespace hypwave {

using Complex = std::complex<double>;

/// Point of the open unit disc. Construction rejects |z| >= 1.
class DiscPoint {
public:
  DiscPoint() = default;
  DiscPoint(double x, double y);
  explicit DiscPoint(Complex z) : DiscPoint(z.real(), z.imag()) {}

  double x() const { return x_; }
  double y() const { return y_; }
  Complex z() const { return {x_, y_}; }
  double norm2() const { return x_ * x_ + y_ * y_; }

  friend bool operator==(const DiscPoint &, const DiscPoint &) = default;

private:
  double x_ = 0.0;
  double y_ = 0.0;
};

/// Disc isometry. When `conjugate_first` is set the map is z -> m(conj z);
/// that form only exists for reflections used in tests.
class MobiusMap {
public:
  MobiusMap() = default;
  /// Normalizes to |a|^2 - |b|^2 = 1; throws if |a|^2 - |b|^2 <= 0.
  MobiusMap(Complex a, Complex b, bool conjugate_first = false);

  static MobiusMap identity() { return {}; }
  static MobiusMap rotation(double angle);
  /// Hyperbolic translation along the real axis by distance tau.
  static MobiusMap boost(double tau);
  static MobiusMap reflection(); // z -> conj z

  Complex a() const { return a_; }
  Complex b() const { return b_; }
  bool conjugate_first() const { return conjugate_first_; }

  Complex apply(Complex z) const;
  DiscPoint apply(const DiscPoint &p) const { return DiscPoint{apply(p.z())}; }
  DiscPoint operator()(const DiscPoint &p) const { return apply(p); }

  MobiusMap inverse() const;
  /// (lhs * rhs)(z) = lhs(rhs(z)).
  friend MobiusMap operator*(const MobiusMap &lhs, const MobiusMap &rhs);

  /// Max entry-wise distance between the matrices of two maps.
  double distance(const MobiusMap &other) const;

private:
  Complex a_{1.0, 0.0};
  Complex b_{0.0, 0.0};
  bool conjugate_first_ = false;
};

struct ArcDescriptor {
  int id = 0;
  Complex center;
  double radius = 0.0;
  /// Vertex indices 0..7 (P_1 is 0). For a partner arc the endpoints are the
  /// images of the master's endpoints, so slot s on both arcs corresponds.
  std::pair<int, int> endpoints;
  int partner_id = 0;
  /// Carries this arc onto its partner.
  MobiusMap pairing_map;
  bool is_master = false;
};

struct FundamentalDomain {
  std::array<DiscPoint, 8> vertices;
  std::array<ArcDescriptor, 8> arcs;
  std::array<MobiusMap, 4> generators;
  double tau1 = 0.0; // side length, also the translation length of each g_k
  double tau2 = 0.0; // center to vertex
  double rho = 0.0;  // center to arc midpoint (inradius), tau1 / 2
};

namespace constants {
/// Euclidean distance of the octagon vertices from the origin.
double vertex_radius();
/// Euclidean center distance and radius of the arc circles.
double arc_center_distance();
double arc_radius();
/// 2 arccosh(1 + sqrt 2).
double tau1();
/// 2 artanh(2^{-1/4}).
double tau2();
/// tanh(tau1 / 4): where arc P_1P_8 crosses the negative real axis.
double axis_crossing();
} // namespace constants

double hyp_dist(const DiscPoint &z, const DiscPoint &w);
double hyp_dist(Complex z, Complex w);

/// 4 pi sinh^2(R/2); throws std::invalid_argument for R < 0.
double hyp_area_disc(double radius);

/// Area density 4 / (1 - |z|^2)^2.
inline double area_density(Complex z) {
  const double s = 1.0 - std::norm(z);
  return 4.0 / (s * s);
}

/// Point at fraction t in [0,1] of hyperbolic arc length along the geodesic
/// from p to q.
Complex geodesic_point(Complex p, Complex q, double t);

/// Hyperbolic distance from z to the full geodesic carried by the circle
/// |w - center| = radius (the circle must be orthogonal to the unit circle).
double dist_to_geodesic(Complex z, Complex center, double radius);

std::array<MobiusMap, 4> make_generators();
const FundamentalDomain &fundamental_domain();

bool in_fundamental_domain(const DiscPoint &z, const FundamentalDomain &fd,
                           double tol = 1e-12);

/// True if z lies on the closed arc (circle within tol, between its
/// endpoints).
bool on_arc(Complex z, const ArcDescriptor &arc, const FundamentalDomain &fd,
            double tol = 1e-9);

struct PairedPoint {
  DiscPoint point;
  int arc = 0;
};

/// Image of a boundary point on the partner arc. Without `arc` the first arc
/// containing z is used (corners lie on two). Throws ValidationError when z is
/// on no arc.
PairedPoint pair_boundary_point(const DiscPoint &z, const FundamentalDomain &fd,
                                std::optional<int> arc = std::nullopt);

} // namespace hypwave
