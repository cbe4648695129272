#include "fixtures.hpp"

#include "hypwave/error.hpp"
#include "hypwave/hyperbolic.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hypwave;
using doctest::Approx;

namespace {

const double kSqrt2 = std::numbers::sqrt2;
const double kPi = std::numbers::pi;

Complex vertex(int j) { // P_j, j = 1..8
  const double angle = (157.5 - 45.0 * (j - 1)) * kPi / 180.0;
  return std::polar(std::pow(2.0, -0.25), angle);
}

} // namespace

TEST_CASE("DiscPoint rejects points on or outside the unit circle") {
  CHECK_NOTHROW(DiscPoint(0.999, 0.0));
  CHECK_THROWS_AS(DiscPoint(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(DiscPoint(0.8, 0.8), std::domain_error);
}

TEST_CASE("hyp_dist") {
  CHECK(hyp_dist(Complex{0, 0}, Complex{0, 0}) == 0.0);
  CHECK(hyp_dist(Complex{0, 0}, Complex{0.5, 0}) ==
        Approx(2.0 * std::atanh(0.5)).epsilon(1e-14));
  CHECK(hyp_dist(Complex{0, 0}, Complex{0.5, 0}) ==
        Approx(1.0986123).epsilon(1e-7));
  CHECK(hyp_dist(Complex{0, 0}, vertex(1)) ==
        Approx(2.0 * std::atanh(std::pow(2.0, -0.25))).epsilon(1e-14));

  SUBCASE("matches arccosh form, symmetric") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
      const Complex z = fixtures::random_disc_point(rng);
      const Complex w = fixtures::random_disc_point(rng);
      const double ref = std::acosh(1.0 + 2.0 * std::norm(z - w) /
                                              ((1.0 - std::norm(z)) *
                                               (1.0 - std::norm(w))));
      CHECK(hyp_dist(z, w) == Approx(ref).epsilon(1e-9));
      CHECK(hyp_dist(z, w) == hyp_dist(w, z));
    }
  }
  SUBCASE("accurate for nearby points") {
    const Complex z{0.3, 0.1};
    const double eps = 1e-9;
    // metric factor 2/(1-|z|^2)
    CHECK(hyp_dist(z, z + eps) ==
          Approx(2.0 * eps / (1.0 - std::norm(z))).epsilon(1e-6));
  }
}

TEST_CASE("hyp_area_disc") {
  CHECK(hyp_area_disc(0.0) == 0.0);
  CHECK(hyp_area_disc(2.0 * std::asinh(1.0)) == Approx(4.0 * kPi));
  CHECK(hyp_area_disc(1.0) == Approx(3.4122762653).epsilon(1e-10));
  CHECK_THROWS_AS(hyp_area_disc(-0.1), std::invalid_argument);

  // Polar quadrature of 4/(1-r^2)^2 over the Euclidean disc of radius
  // tanh(1/2), Gauss-Legendre in r.
  const double rmax = std::tanh(0.5);
  const double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                           0.5384693101056831, 0.9061798459386640};
  const double weights[5] = {0.2369268850561891, 0.4786286704993665,
                             0.5688888888888889, 0.4786286704993665,
                             0.2369268850561891};
  double integral = 0.0;
  const int panels = 50;
  for (int p = 0; p < panels; ++p) {
    const double a = rmax * p / panels, b = rmax * (p + 1) / panels;
    for (int k = 0; k < 5; ++k) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * nodes[k];
      integral += 0.5 * (b - a) * weights[k] * 2.0 * kPi * r * 4.0 /
                  ((1 - r * r) * (1 - r * r));
    }
  }
  CHECK(integral == Approx(hyp_area_disc(1.0)).epsilon(1e-12));
}

TEST_CASE("MobiusMap basics") {
  const Complex z{0.3, -0.4};
  CHECK(std::abs(MobiusMap::identity().apply(z) - z) < 1e-16);
  CHECK_THROWS(MobiusMap(Complex{0.5, 0}, Complex{1.0, 0}));

  const MobiusMap g(Complex{1.2, 0.3}, Complex{0.4, -0.5});
  CHECK(std::abs(g.inverse().apply(g.apply(z)) - z) < 1e-14);
  CHECK(std::norm(g.apply(z)) < 1.0);
  const MobiusMap h = MobiusMap::rotation(0.7);
  CHECK(std::abs((g * h).apply(z) - g.apply(h.apply(z))) < 1e-14);
  CHECK(std::abs(h.apply(z) - z * std::polar(1.0, 0.7)) < 1e-15);
  CHECK(std::abs(MobiusMap::reflection().apply(z) - std::conj(z)) < 1e-16);
  CHECK((g * g.inverse()).distance(MobiusMap::identity()) < 1e-14);
}

TEST_CASE("boost displaces the real axis by tau") {
  const double tau = 1.3;
  const MobiusMap t = MobiusMap::boost(tau);
  for (double x = -0.95; x < 0.96; x += 0.05)
    CHECK(hyp_dist(Complex{x, 0}, t.apply(Complex{x, 0})) ==
          Approx(tau).epsilon(1e-10));
}

TEST_CASE("generators") {
  const auto g = make_generators();
  CHECK(g[0].a().real() == Approx(2.4142136).epsilon(1e-7));
  CHECK(g[0].b().real() == Approx(2.1973682).epsilon(1e-7));
  CHECK(std::abs(g[0].b().imag()) < 1e-15);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(g[k].a() - (1.0 + kSqrt2)) < 1e-14);
    CHECK(std::abs(g[k].b() - std::sqrt(2.0 + 2.0 * kSqrt2) *
                                  std::polar(1.0, k * kPi / 4.0)) < 1e-14);
    const MobiusMap conj = MobiusMap::rotation(k * kPi / 4.0) * g[0] *
                           MobiusMap::rotation(-k * kPi / 4.0);
    CHECK(conj.distance(g[k]) < 1e-12);
  }

  SUBCASE("group relation") {
    const MobiusMap r = g[0] * g[1].inverse() * g[2] * g[3].inverse() *
                        g[0].inverse() * g[1] * g[2].inverse() * g[3];
    CHECK(r.distance(MobiusMap::identity()) < 1e-10);
  }

  SUBCASE("g0 of the origin") {
    const Complex w = g[0].apply(Complex{0, 0});
    CHECK(w.real() ==
          Approx(std::sqrt(2.0 + 2.0 * kSqrt2) / (1.0 + kSqrt2)).epsilon(1e-14));
    CHECK(w.real() == Approx(0.9101797).epsilon(1e-7));
    CHECK(std::abs(w.imag()) < 1e-15);
  }

  SUBCASE("isometry over random pairs") {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Complex z = fixtures::random_disc_point(rng, 0.9);
      const Complex w = fixtures::random_disc_point(rng, 0.9);
      const double d = hyp_dist(z, w);
      for (const MobiusMap &gk : g) {
        worst = std::max(worst, std::abs(hyp_dist(gk.apply(z), gk.apply(w)) - d));
        worst = std::max(
            worst, std::abs(hyp_dist(gk.inverse().apply(z),
                                     gk.inverse().apply(w)) - d));
      }
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("metric constants") {
  const double tau1 = 2.0 * std::acosh(1.0 + kSqrt2);
  const double tau2 = 2.0 * std::atanh(std::pow(2.0, -0.25));
  CHECK(constants::tau1() == Approx(tau1).epsilon(1e-15));
  CHECK(constants::tau2() == Approx(tau2).epsilon(1e-15));
  CHECK(std::abs(constants::tau1() - 3.0571418390) < 1e-9);
  CHECK(std::abs(constants::tau2() - 2.4484524477) < 1e-9);
  CHECK(std::abs(constants::axis_crossing() - 0.6435943) < 1e-7);
  CHECK(2.0 * constants::tau2() == Approx(4.8969).epsilon(1e-4));

  const FundamentalDomain &fd = fundamental_domain();
  CHECK(fd.tau1 == constants::tau1());
  CHECK(fd.tau2 == constants::tau2());
  CHECK(fd.rho == Approx(tau1 / 2));
  for (int j = 0; j < 8; ++j) {
    CHECK(std::abs(fd.vertices[j].z() - vertex(j + 1)) < 1e-15);
    const Complex next = fd.vertices[(j + 1) % 8].z();
    CHECK(std::abs(hyp_dist(fd.vertices[j].z(), next) - tau1) < 1e-10);
    CHECK(std::abs(hyp_dist(Complex{0, 0}, fd.vertices[j].z()) - tau2) < 1e-10);
  }
  CHECK(std::abs(hyp_dist(Complex{0, 0},
                          Complex{constants::axis_crossing(), 0}) -
                 tau1 / 2) < 1e-10);
}

TEST_CASE("octagon area is 4 pi") {
  // Midpoint rule in the angle; the boundary radius r(phi) is the nearest
  // ray/arc-circle intersection and the radial integral of the density is
  // 2 r^2 / (1 - r^2).
  const FundamentalDomain &fd = fundamental_domain();
  const int n = 200000;
  double area = 0.0;
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * kPi * (i + 0.5) / n;
    const Complex dir = std::polar(1.0, phi);
    double r = 1.0;
    for (const ArcDescriptor &a : fd.arcs) {
      // |t dir - c| = R  =>  t^2 - 2 t Re(dir conj c) + |c|^2 - R^2 = 0
      const double bh = (dir * std::conj(a.center)).real();
      const double disc = bh * bh - (std::norm(a.center) - a.radius * a.radius);
      if (disc >= 0.0) {
        const double t = bh - std::sqrt(disc);
        if (t > 0.0)
          r = std::min(r, t);
      }
    }
    area += 2.0 * r * r / (1.0 - r * r) * (2.0 * kPi / n);
  }
  CHECK(area == Approx(4.0 * kPi).epsilon(1e-8));
}

TEST_CASE("dist_to_geodesic against brute force") {
  const FundamentalDomain &fd = fundamental_domain();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Complex z = fixtures::random_disc_point(rng, 0.8);
    const ArcDescriptor &a = fd.arcs[i % 8];
    // Dense sampling of the circle inside the disc, then local bisection.
    double best = 1e300;
    double best_t = 0.0;
    const Complex c = a.center;
    for (int k = 0; k <= 20000; ++k) {
      const double t = 2.0 * kPi * k / 20000;
      const Complex w = c + std::polar(a.radius, t);
      if (std::norm(w) >= 1.0)
        continue;
      const double d = hyp_dist(z, w);
      if (d < best) {
        best = d;
        best_t = t;
      }
    }
    for (double step = 2.0 * kPi / 20000; step > 1e-13; step *= 0.5) {
      for (double t : {best_t - step, best_t + step}) {
        const Complex w = c + std::polar(a.radius, t);
        if (std::norm(w) < 1.0 && hyp_dist(z, w) < best) {
          best = hyp_dist(z, w);
          best_t = t;
        }
      }
    }
    CHECK(dist_to_geodesic(z, a.center, a.radius) == Approx(best).epsilon(1e-8));
  }
}

TEST_CASE("geodesic_point") {
  const Complex p{-0.3, 0.2}, q{0.5, 0.4};
  const double d = hyp_dist(p, q);
  CHECK(std::abs(geodesic_point(p, q, 0.0) - p) < 1e-14);
  CHECK(std::abs(geodesic_point(p, q, 1.0) - q) < 1e-14);
  for (double t : {0.1, 0.25, 0.5, 0.9}) {
    const Complex w = geodesic_point(p, q, t);
    CHECK(hyp_dist(p, w) == Approx(t * d).epsilon(1e-12));
    CHECK(hyp_dist(w, q) == Approx((1 - t) * d).epsilon(1e-12));
  }
}

TEST_CASE("in_fundamental_domain") {
  const FundamentalDomain &fd = fundamental_domain();
  CHECK(in_fundamental_domain(DiscPoint(0, 0), fd));
  CHECK_FALSE(in_fundamental_domain(DiscPoint(0.95, 0), fd));
  CHECK(std::abs(fd.generators[0].inverse().apply(Complex{0.95, 0})) < 0.95);
  CHECK(in_fundamental_domain(fd.vertices[0], fd, 1e-9));
  CHECK(in_fundamental_domain(DiscPoint(0.6435, 0), fd));
  CHECK_FALSE(in_fundamental_domain(DiscPoint(0.6437, 0), fd));
}

TEST_CASE("arc structure") {
  const FundamentalDomain &fd = fundamental_domain();
  int masters = 0;
  for (const ArcDescriptor &a : fd.arcs) {
    masters += a.is_master;
    CHECK(fd.arcs[a.partner_id].partner_id == a.id);
    CHECK(a.is_master != fd.arcs[a.partner_id].is_master);
    // circle orthogonal to the unit circle
    CHECK(std::norm(a.center) == Approx(1.0 + a.radius * a.radius));
    // endpoints map onto the partner's endpoints, in slot order
    const ArcDescriptor &p = fd.arcs[a.partner_id];
    CHECK(std::abs(a.pairing_map.apply(fd.vertices[a.endpoints.first].z()) -
                   fd.vertices[p.endpoints.first].z()) < 1e-12);
    CHECK(std::abs(a.pairing_map.apply(fd.vertices[a.endpoints.second].z()) -
                   fd.vertices[p.endpoints.second].z()) < 1e-12);
  }
  CHECK(masters == 4);
}

TEST_CASE("pair_boundary_point") {
  const FundamentalDomain &fd = fundamental_domain();
  const double x = constants::axis_crossing();

  SUBCASE("axis crossing goes to the opposite side via g0") {
    const PairedPoint p = pair_boundary_point(DiscPoint(-x, 0), fd);
    CHECK(p.point.x() == Approx(x).epsilon(1e-12));
    CHECK(std::abs(p.point.y()) < 1e-12);
    CHECK(fd.arcs[p.arc].endpoints.first == 3); // arc P4P5
    const Complex g0 = fd.generators[0].apply(Complex{-x, 0});
    CHECK(std::abs(g0 - p.point.z()) < 1e-14);
  }
  SUBCASE("P6 to P1 via g3") {
    const PairedPoint p = pair_boundary_point(fd.vertices[5], fd, 4);
    CHECK(std::abs(p.point.z() - fd.vertices[0].z()) < 1e-12);
    CHECK(std::abs(fd.generators[3].apply(fd.vertices[5].z()) -
                   fd.vertices[0].z()) < 1e-12);
  }
  SUBCASE("involution on sampled arc points") {
    double worst = 0.0;
    for (const ArcDescriptor &a : fd.arcs) {
      const Complex p = fd.vertices[a.endpoints.first].z();
      const Complex q = fd.vertices[a.endpoints.second].z();
      for (int k = 1; k < 13; ++k) {
        const Complex z = geodesic_point(p, q, k / 13.0);
        const PairedPoint once = pair_boundary_point(DiscPoint(z), fd, a.id);
        CHECK(once.arc == a.partner_id);
        CHECK(on_arc(once.point.z(), fd.arcs[once.arc], fd));
        const PairedPoint twice = pair_boundary_point(once.point, fd, once.arc);
        worst = std::max(worst, std::abs(twice.point.z() - z));
      }
    }
    CHECK(worst < 1e-10);
  }
  SUBCASE("points off the boundary are rejected") {
    CHECK_THROWS_AS(pair_boundary_point(DiscPoint(0.1, 0.1), fd),
                    ValidationError);
    CHECK_THROWS_AS(pair_boundary_point(DiscPoint(-x, 0), fd, 0),
                    ValidationError);
  }
}
