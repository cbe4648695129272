#include "delaunay.hpp"

#include "hypwave/error.hpp"

#include <algorithm>
#include <string>

namespace hypwave::detail {

namespace {

using Point = std::complex<double>;

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nb{-1, -1, -1}; // nb[i] is across the edge opposite v[i]
  bool alive = true;
};

double incircle(Point a, Point b, Point c, Point d) {
  const double adx = a.real() - d.real(), ady = a.imag() - d.imag();
  const double bdx = b.real() - d.real(), bdy = b.imag() - d.imag();
  const double cdx = c.real() - d.real(), cdy = c.imag() - d.imag();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
         ad * (bdx * cdy - bdy * cdx);
}

class Triangulator {
public:
  explicit Triangulator(const std::vector<Point> &input) : pts_(input) {
    double extent = 1.0;
    for (const Point &p : pts_)
      extent = std::max({extent, std::abs(p.real()), std::abs(p.imag())});
    const double s = 20.0 * extent;
    n_input_ = static_cast<int>(pts_.size());
    pts_.push_back({-s, -s});
    pts_.push_back({s, -s});
    pts_.push_back({0.0, s});
    tris_.push_back({{n_input_, n_input_ + 1, n_input_ + 2}});
  }

  void insert_all() {
    for (int i = 0; i < n_input_; ++i)
      insert(i);
  }

  std::vector<std::array<int, 3>> result() const {
    std::vector<std::array<int, 3>> out;
    for (const Tri &t : tris_) {
      if (!t.alive)
        continue;
      if (t.v[0] >= n_input_ || t.v[1] >= n_input_ || t.v[2] >= n_input_)
        continue;
      out.push_back(t.v);
    }
    return out;
  }

private:
  Point at(int i) const { return pts_[i]; }

  bool inside_circumcircle(int t, Point p) const {
    const Tri &tr = tris_[t];
    return incircle(at(tr.v[0]), at(tr.v[1]), at(tr.v[2]), p) > 0.0;
  }

  int locate(Point p) {
    int t = last_;
    if (t < 0 || !tris_[t].alive)
      t = static_cast<int>(tris_.size()) - 1;
    while (!tris_[t].alive)
      --t;
    const std::size_t max_steps = 4 * tris_.size() + 16;
    for (std::size_t step = 0; step < max_steps; ++step) {
      const Tri &tr = tris_[t];
      int next = -1;
      for (int i = 0; i < 3; ++i) {
        const Point a = at(tr.v[(i + 1) % 3]);
        const Point b = at(tr.v[(i + 2) % 3]);
        if (orient2d(a, b, p) < 0.0) {
          next = tr.nb[i];
          break;
        }
      }
      if (next < 0)
        return t;
      t = next;
    }
    // Walk cycled on a degenerate configuration; fall back to a scan.
    for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
      const Tri &tr = tris_[k];
      if (!tr.alive)
        continue;
      bool inside = true;
      for (int i = 0; i < 3 && inside; ++i)
        inside = orient2d(at(tr.v[(i + 1) % 3]), at(tr.v[(i + 2) % 3]), p) >= 0.0;
      if (inside)
        return k;
    }
    throw NumericalError("Delaunay point location failed near (" +
                         std::to_string(p.real()) + ", " +
                         std::to_string(p.imag()) + ")");
  }

  bool is_excluded(int t) const {
    return std::find(excluded_.begin(), excluded_.end(), t) != excluded_.end();
  }

  void insert(int pi) {
    const Point p = at(pi);
    const int seed = locate(p);
    {
      const Tri &tr = tris_[seed];
      for (int v : tr.v)
        if (at(v) == p)
          throw NumericalError("duplicate mesh point (" +
                               std::to_string(p.real()) + ", " +
                               std::to_string(p.imag()) + ")");
    }
    forced_set_.clear();
    std::vector<int> cav = cavity(seed, p);

    struct BoundaryEdge {
      int a, b, outside;
    };
    std::vector<BoundaryEdge> edges;
    for (int t : cav) {
      const Tri &tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        const int nb = tr.nb[i];
        if (nb >= 0 && mark_[nb] == stamp_)
          continue;
        edges.push_back({tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], nb});
      }
    }
    for (int t : cav)
      tris_[t].alive = false;

    const int first = static_cast<int>(tris_.size());
    for (const BoundaryEdge &e : edges) {
      Tri nt;
      nt.v = {e.a, e.b, pi};
      nt.nb[2] = e.outside;
      const int id = static_cast<int>(tris_.size());
      tris_.push_back(nt);
      if (e.outside >= 0) {
        Tri &o = tris_[e.outside];
        for (int i = 0; i < 3; ++i) {
          const int oa = o.v[(i + 1) % 3];
          const int ob = o.v[(i + 2) % 3];
          if (oa == e.b && ob == e.a)
            o.nb[i] = id;
        }
      }
    }
    const int last = static_cast<int>(tris_.size());
    // New triangle (a, b, p): across b-p is the one starting at b, across
    // p-a is the one whose second vertex is a.
    for (int t = first; t < last; ++t) {
      for (int u = first; u < last; ++u) {
        if (u == t)
          continue;
        if (tris_[u].v[0] == tris_[t].v[1])
          tris_[t].nb[0] = u;
        if (tris_[u].v[1] == tris_[t].v[0])
          tris_[t].nb[1] = u;
      }
    }
    last_ = first;
  }

  // Connected set of triangles reachable from `seed` whose circumcircle
  // contains p, shrunk until p sees every boundary edge. Forced triangles
  // join unconditionally.
  std::vector<int> cavity(int seed, Point p) {
    for (;;) {
      std::vector<int> cav{seed};
      mark_.resize(tris_.size(), 0);
      ++stamp_;
      mark_[seed] = stamp_;
      for (int f : forced_set_)
        if (mark_[f] != stamp_) {
          mark_[f] = stamp_;
          cav.push_back(f);
        }
      for (std::size_t k = 0; k < cav.size(); ++k) {
        for (int nb : tris_[cav[k]].nb) {
          if (nb < 0 || mark_[nb] == stamp_ || is_excluded(nb))
            continue;
          if (inside_circumcircle(nb, p)) {
            mark_[nb] = stamp_;
            cav.push_back(nb);
          }
        }
      }
      int bad = -1;
      int bad_neighbor = -1;
      for (int t : cav) {
        const Tri &tr = tris_[t];
        for (int i = 0; i < 3; ++i) {
          const int nb = tr.nb[i];
          if (nb >= 0 && mark_[nb] == stamp_)
            continue;
          if (orient2d(at(tr.v[(i + 1) % 3]), at(tr.v[(i + 2) % 3]), p) <= 0.0) {
            bad = t;
            bad_neighbor = nb;
            break;
          }
        }
        if (bad >= 0)
          break;
      }
      if (bad < 0) {
        excluded_.clear();
        return cav;
      }
      const bool pinned =
          bad == seed ||
          std::find(forced_set_.begin(), forced_set_.end(), bad) !=
              forced_set_.end();
      if (!pinned) {
        excluded_.push_back(bad);
      } else if (bad_neighbor >= 0 && !is_excluded(bad_neighbor) &&
                 std::find(forced_set_.begin(), forced_set_.end(),
                           bad_neighbor) == forced_set_.end()) {
        // p lies on an edge of a pinned triangle; the triangle across joins.
        forced_set_.push_back(bad_neighbor);
      } else {
        excluded_.clear();
        throw NumericalError("Delaunay cavity is not star-shaped near (" +
                             std::to_string(p.real()) + ", " +
                             std::to_string(p.imag()) + ")");
      }
      if (excluded_.size() + forced_set_.size() > 64) {
        excluded_.clear();
        throw NumericalError("Delaunay cavity repair did not converge near (" +
                             std::to_string(p.real()) + ", " +
                             std::to_string(p.imag()) + ")");
      }
    }
  }

  std::vector<Point> pts_;
  std::vector<Tri> tris_;
  std::vector<int> mark_;
  int stamp_ = 0;
  std::vector<int> excluded_;
  std::vector<int> forced_set_;
  int n_input_ = 0;
  int last_ = -1;
};

} // namespace

double orient2d(std::complex<double> a, std::complex<double> b,
                std::complex<double> c) {
  return (b.real() - a.real()) * (c.imag() - a.imag()) -
         (b.imag() - a.imag()) * (c.real() - a.real());
}

std::vector<std::array<int, 3>>
delaunay_triangulate(const std::vector<std::complex<double>> &points) {
  Triangulator tr(points);
  tr.insert_all();
  return tr.result();
}

} // namespace hypwave::detail
