#include "hypwave/hyperbolic.hpp"

#include "hypwave/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hypwave {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// Polar angle of P_{j+1} (0-based j).
double vertex_angle(int j) { return (157.5 - 45.0 * j) * kPi / 180.0; }

// Direction of the center of arc a.
double arc_mid_angle(int a) { return (135.0 - 45.0 * a) * kPi / 180.0; }

double angle_gap(double u, double v) {
  double d = std::remainder(u - v, 2.0 * kPi);
  return std::abs(d);
}

FundamentalDomain build_domain() {
  FundamentalDomain fd;
  fd.tau1 = constants::tau1();
  fd.tau2 = constants::tau2();
  fd.rho = 0.5 * fd.tau1;
  fd.generators = make_generators();

  const double rv = constants::vertex_radius();
  for (int j = 0; j < 8; ++j)
    fd.vertices[j] = DiscPoint{std::polar(rv, vertex_angle(j))};

  // Arc a (a = 0..3) is the image of arc a+4 under g_{3-a}.
  for (int a = 0; a < 8; ++a) {
    ArcDescriptor &arc = fd.arcs[a];
    arc.id = a;
    arc.center = std::polar(constants::arc_center_distance(), arc_mid_angle(a));
    arc.radius = constants::arc_radius();
    arc.partner_id = (a + 4) % 8;
    arc.is_master = a < 4;
    const MobiusMap &g = fd.generators[3 - (a % 4)];
    arc.pairing_map = arc.is_master ? g.inverse() : g;
  }
  for (int a = 0; a < 4; ++a)
    fd.arcs[a].endpoints = {a, (a + 1) % 8};

  // Partner endpoints are the images of the master endpoints.
  auto vertex_of = [&](Complex z) {
    for (int j = 0; j < 8; ++j)
      if (std::abs(fd.vertices[j].z() - z) < 1e-10)
        return j;
    throw std::logic_error("generator does not map a corner onto a corner");
  };
  for (int a = 0; a < 4; ++a) {
    const ArcDescriptor &m = fd.arcs[a];
    const auto [s, e] = m.endpoints;
    fd.arcs[a + 4].endpoints = {
        vertex_of(m.pairing_map.apply(fd.vertices[s].z())),
        vertex_of(m.pairing_map.apply(fd.vertices[e].z()))};
  }
  return fd;
}

} // namespace

DiscPoint::DiscPoint(double x, double y) : x_(x), y_(y) {
  if (!(x * x + y * y < 1.0))
    throw std::domain_error("point (" + std::to_string(x) + ", " +
                            std::to_string(y) + ") is not inside the unit disc");
}

MobiusMap::MobiusMap(Complex a, Complex b, bool conjugate_first)
    : conjugate_first_(conjugate_first) {
  const double det = std::norm(a) - std::norm(b);
  if (!(det > 0.0))
    throw std::invalid_argument("Mobius map does not preserve the disc");
  const double s = 1.0 / std::sqrt(det);
  a_ = a * s;
  b_ = b * s;
}

MobiusMap MobiusMap::rotation(double angle) {
  return {std::polar(1.0, 0.5 * angle), 0.0};
}

MobiusMap MobiusMap::boost(double tau) {
  return {std::cosh(0.5 * tau), std::sinh(0.5 * tau)};
}

MobiusMap MobiusMap::reflection() { return {1.0, 0.0, true}; }

Complex MobiusMap::apply(Complex z) const {
  if (conjugate_first_)
    z = std::conj(z);
  return (a_ * z + b_) / (std::conj(b_) * z + std::conj(a_));
}

MobiusMap MobiusMap::inverse() const {
  if (!conjugate_first_)
    return {std::conj(a_), -b_};
  // z -> m(conj z) inverts to w -> conj(m^{-1}(w)) = conj(m^{-1})(conj w)
  return {a_, -std::conj(b_), true};
}

MobiusMap operator*(const MobiusMap &lhs, const MobiusMap &rhs) {
  Complex a2 = rhs.a_;
  Complex b2 = rhs.b_;
  if (lhs.conjugate_first_) {
    a2 = std::conj(a2);
    b2 = std::conj(b2);
  }
  const Complex a = lhs.a_ * a2 + lhs.b_ * std::conj(b2);
  const Complex b = lhs.a_ * b2 + lhs.b_ * std::conj(a2);
  return {a, b, lhs.conjugate_first_ != rhs.conjugate_first_};
}

double MobiusMap::distance(const MobiusMap &other) const {
  // M and -M are the same map.
  const double plus =
      std::max(std::abs(a_ - other.a_), std::abs(b_ - other.b_));
  const double minus =
      std::max(std::abs(a_ + other.a_), std::abs(b_ + other.b_));
  return std::min(plus, minus);
}

namespace constants {
double vertex_radius() { return std::pow(2.0, -0.25); }
double arc_center_distance() { return std::sqrt((1.0 + kSqrt2) / 2.0); }
double arc_radius() { return std::sqrt((kSqrt2 - 1.0) / 2.0); }
double tau1() { return 2.0 * std::acosh(1.0 + kSqrt2); }
double tau2() { return 2.0 * std::atanh(vertex_radius()); }
double axis_crossing() { return std::sqrt(kSqrt2 - 1.0); }
} // namespace constants

double hyp_dist(Complex z, Complex w) {
  // cosh d = 1 + 2 delta, so d = 2 asinh(sqrt(delta)); stable for small d.
  const double delta =
      std::norm(z - w) / ((1.0 - std::norm(z)) * (1.0 - std::norm(w)));
  return 2.0 * std::asinh(std::sqrt(delta));
}

double hyp_dist(const DiscPoint &z, const DiscPoint &w) {
  return hyp_dist(z.z(), w.z());
}

double hyp_area_disc(double radius) {
  if (radius < 0.0)
    throw std::invalid_argument("disc radius must be nonnegative");
  const double s = std::sinh(0.5 * radius);
  return 4.0 * kPi * s * s;
}

Complex geodesic_point(Complex p, Complex q, double t) {
  // Move p to the origin; there the geodesic is a radius.
  const Complex w = (q - p) / (1.0 - std::conj(p) * q);
  const double len = std::abs(w);
  if (len == 0.0)
    return p;
  const double d = 2.0 * std::atanh(len);
  const Complex u = std::tanh(0.5 * t * d) * (w / len);
  return (u + p) / (1.0 + std::conj(p) * u);
}

double dist_to_geodesic(Complex z, Complex center, double radius) {
  const double num = std::abs(std::norm(z - center) - radius * radius);
  return std::asinh(num / (radius * (1.0 - std::norm(z))));
}

std::array<MobiusMap, 4> make_generators() {
  std::array<MobiusMap, 4> g;
  const double a = 1.0 + kSqrt2;
  const double b = std::sqrt(2.0 + 2.0 * kSqrt2);
  for (int k = 0; k < 4; ++k)
    g[k] = MobiusMap{a, std::polar(b, k * kPi / 4.0)};
  return g;
}

const FundamentalDomain &fundamental_domain() {
  static const FundamentalDomain fd = build_domain();
  return fd;
}

bool in_fundamental_domain(const DiscPoint &z, const FundamentalDomain &fd,
                           double tol) {
  const double r = std::abs(z.z());
  for (const MobiusMap &g : fd.generators) {
    if (std::abs(g.apply(z.z())) < r - tol)
      return false;
    if (std::abs(g.inverse().apply(z.z())) < r - tol)
      return false;
  }
  return true;
}

bool on_arc(Complex z, const ArcDescriptor &arc, const FundamentalDomain &fd,
            double tol) {
  if (!(std::norm(z) < 1.0))
    return false;
  if (std::abs(std::abs(z - arc.center) - arc.radius) > tol)
    return false;
  if (std::abs(z) > std::abs(fd.vertices[0].z()) + tol)
    return false;
  const double half_span = 22.5 * kPi / 180.0;
  return angle_gap(std::arg(z), arc_mid_angle(arc.id)) <= half_span + tol;
}

PairedPoint pair_boundary_point(const DiscPoint &z, const FundamentalDomain &fd,
                                std::optional<int> arc) {
  auto pair_on = [&](const ArcDescriptor &a) {
    return PairedPoint{a.pairing_map.apply(z), a.partner_id};
  };
  if (arc) {
    if (*arc < 0 || *arc > 7)
      throw std::invalid_argument("arc index out of range");
    const ArcDescriptor &a = fd.arcs[*arc];
    if (!on_arc(z.z(), a, fd))
      throw ValidationError("point (" + std::to_string(z.x()) + ", " +
                            std::to_string(z.y()) + ") is not on arc " +
                            std::to_string(*arc));
    return pair_on(a);
  }
  for (const ArcDescriptor &a : fd.arcs)
    if (on_arc(z.z(), a, fd))
      return pair_on(a);
  throw ValidationError("point (" + std::to_string(z.x()) + ", " +
                        std::to_string(z.y()) +
                        ") is on no boundary arc (tolerance 1e-9)");
}

} // namespace hypwave
