#include "hypwave/mesh.hpp"

#include "delaunay.hpp"
#include "hypwave/error.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

namespace hypwave {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOnArcTol = 1e-9;
constexpr double kPairTol = 1e-9;
// Interior points closer than this fraction of target_h to the boundary are
// dropped.
constexpr double kBoundaryGap = 0.4;
constexpr int kSmoothingPasses = 4;
constexpr double kLayerSpacing = 0.7;

// Raised by validate_mesh so load_mesh can point at the offending line.
class MeshInvariantError : public ValidationError {
public:
  MeshInvariantError(const std::string &what, std::optional<int> vertex,
                     std::optional<int> triangle)
      : ValidationError(what), vertex(vertex), triangle(triangle) {}
  std::optional<int> vertex;
  std::optional<int> triangle;
};

[[noreturn]] void vertex_error(int v, const std::string &what) {
  throw MeshInvariantError(fmt::format("vertex {}: {}", v, what), v,
                           std::nullopt);
}

[[noreturn]] void triangle_error(int t, const std::string &what) {
  throw MeshInvariantError(fmt::format("triangle {}: {}", t, what),
                           std::nullopt, t);
}

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int u, int v) { return {std::min(u, v), std::max(u, v)}; }

// Ordered vertex chain along each arc: start corner, slots 1..n-1, end corner.
// Throws if a slot or corner is missing.
std::array<std::vector<int>, 8> arc_chains(const Mesh &m,
                                           const FundamentalDomain &fd) {
  std::array<int, 8> corner_vertex;
  corner_vertex.fill(-1);
  std::array<std::map<int, int>, 8> slots;
  for (int v = 0; v < static_cast<int>(m.tags.size()); ++v) {
    const VertexTag &t = m.tags[v];
    if (t.kind == VertexTag::Kind::corner) {
      if (t.corner < 1 || t.corner > 8)
        vertex_error(v, "corner index out of range");
      if (corner_vertex[t.corner - 1] >= 0)
        vertex_error(v, fmt::format("corner {} appears twice", t.corner));
      corner_vertex[t.corner - 1] = v;
    } else if (t.kind == VertexTag::Kind::arc) {
      if (t.arc < 0 || t.arc > 7 || t.slot < 1)
        vertex_error(v, "arc tag out of range");
      if (!slots[t.arc].emplace(t.slot, v).second)
        vertex_error(v, fmt::format("arc {} slot {} appears twice", t.arc,
                                    t.slot));
    }
  }
  for (int j = 0; j < 8; ++j)
    if (corner_vertex[j] < 0)
      throw MeshInvariantError(fmt::format("corner {} is missing", j + 1),
                               std::nullopt, std::nullopt);

  std::array<std::vector<int>, 8> chains;
  const std::size_t n_slots = slots[0].size();
  for (int a = 0; a < 8; ++a) {
    if (slots[a].size() != n_slots)
      throw MeshInvariantError(
          fmt::format("arc {} has {} slots, arc 0 has {}", a, slots[a].size(),
                      n_slots),
          std::nullopt, std::nullopt);
    auto &chain = chains[a];
    chain.push_back(corner_vertex[fd.arcs[a].endpoints.first]);
    int expect = 1;
    for (const auto &[slot, v] : slots[a]) {
      if (slot != expect)
        vertex_error(v, fmt::format("arc {} slots are not consecutive", a));
      chain.push_back(v);
      ++expect;
    }
    chain.push_back(corner_vertex[fd.arcs[a].endpoints.second]);
  }
  return chains;
}

// Euclidean Delaunay of all mesh points, restricted to the triangles
// reachable from the origin vertex (index 0) without crossing a boundary
// chord.
std::vector<Triangle> triangulate_domain(const Mesh &m,
                                         const FundamentalDomain &fd) {
  const auto chains = arc_chains(m, fd);
  std::vector<Complex> coords;
  coords.reserve(m.points.size());
  for (const DiscPoint &p : m.points)
    coords.push_back(p.z());
  const auto all = detail::delaunay_triangulate(coords);

  // Keep the triangles reachable from the origin without crossing a chord.
  std::map<EdgeKey, std::vector<int>> edge_tris;
  for (int t = 0; t < static_cast<int>(all.size()); ++t)
    for (int i = 0; i < 3; ++i)
      edge_tris[edge_key(all[t][i], all[t][(i + 1) % 3])].push_back(t);

  std::map<EdgeKey, int> chord_arc;
  for (int a = 0; a < 8; ++a)
    for (std::size_t k = 0; k + 1 < chains[a].size(); ++k)
      chord_arc[edge_key(chains[a][k], chains[a][k + 1])] = a;

  int seed = -1;
  for (int t = 0; t < static_cast<int>(all.size()) && seed < 0; ++t)
    for (int v : all[t])
      if (v == 0)
        seed = t;
  if (seed < 0)
    throw NumericalError("triangulation lost the origin vertex");

  std::vector<char> inside(all.size(), 0);
  std::vector<int> stack{seed};
  inside[seed] = 1;
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    for (int i = 0; i < 3; ++i) {
      const EdgeKey e = edge_key(all[t][i], all[t][(i + 1) % 3]);
      if (chord_arc.count(e))
        continue;
      for (int u : edge_tris[e]) {
        if (!inside[u]) {
          inside[u] = 1;
          stack.push_back(u);
        }
      }
    }
  }

  for (const auto &[e, a] : chord_arc) {
    int owners = 0;
    for (int t : edge_tris[e])
      owners += inside[t];
    if (owners != 1) {
      const Complex mid = 0.5 * (coords[e.first] + coords[e.second]);
      throw NumericalError(fmt::format(
          "triangulation does not conform to arc {} near ({:.6f}, {:.6f})", a,
          mid.real(), mid.imag()));
    }
  }
  std::vector<Triangle> kept;
  for (int t = 0; t < static_cast<int>(all.size()); ++t)
    if (inside[t])
      kept.push_back(all[t]);

  return kept;
}

// One Laplacian pass over the interior vertices (indices < n_interior): each
// moves to the average of its neighbours taken in a chart centered at the
// vertex, where the metric is conformal to the Euclidean one. Moves that
// leave the domain or come within `gap` of the boundary are shortened or
// rejected.
void smooth_interior(Mesh &m, int n_interior, const FundamentalDomain &fd,
                     double gap) {
  std::vector<std::vector<int>> nbrs(m.points.size());
  for (const Triangle &t : m.triangles)
    for (int i = 0; i < 3; ++i) {
      nbrs[t[i]].push_back(t[(i + 1) % 3]);
      nbrs[t[i]].push_back(t[(i + 2) % 3]);
    }
  std::vector<Complex> moved(n_interior);
  for (int v = 0; v < n_interior; ++v) {
    const Complex p = m.points[v].z();
    auto &nb = nbrs[v];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    moved[v] = p;
    if (v == 0 || nb.empty())
      continue; // the origin anchors the probe and the flood fill
    Complex sum = 0.0;
    for (int u : nb) {
      const Complex q = m.points[u].z();
      sum += (q - p) / (1.0 - std::conj(p) * q);
    }
    const Complex c = sum / static_cast<double>(nb.size());
    // Full step first, then shorter ones if the target is too close to an arc.
    for (double frac : {1.0, 0.5, 0.25}) {
      const Complex cf = frac * c;
      const Complex z = (cf + p) / (1.0 + std::conj(p) * cf);
      if (!in_fundamental_domain(DiscPoint{z}, fd, 0.0))
        continue;
      bool clear = true;
      for (const ArcDescriptor &arc : fd.arcs)
        clear = clear && dist_to_geodesic(z, arc.center, arc.radius) >= gap;
      if (clear) {
        moved[v] = z;
        break;
      }
    }
  }
  for (int v = 0; v < n_interior; ++v)
    m.points[v] = DiscPoint{moved[v]};
}

} // namespace

std::string VertexTag::to_string() const {
  switch (kind) {
  case Kind::interior:
    return "interior";
  case Kind::arc:
    return fmt::format("arc:{}:{}", arc, slot);
  case Kind::corner:
    return fmt::format("corner:{}", corner);
  }
  return "interior";
}

VertexTag VertexTag::parse(const std::string &text) {
  if (text == "interior")
    return interior_vertex();
  auto to_int = [&](const std::string &s) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(s, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw ValidationError("malformed vertex tag '" + text + "'");
    return value;
  };
  if (text.rfind("corner:", 0) == 0) {
    const int j = to_int(text.substr(7));
    if (j < 1 || j > 8)
      throw ValidationError("corner index out of range in '" + text + "'");
    return corner_vertex(j);
  }
  if (text.rfind("arc:", 0) == 0) {
    const std::string rest = text.substr(4);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw ValidationError("malformed vertex tag '" + text + "'");
    const int a = to_int(rest.substr(0, colon));
    const int slot = to_int(rest.substr(colon + 1));
    if (a < 0 || a > 7 || slot < 1)
      throw ValidationError("arc or slot out of range in '" + text + "'");
    return arc_vertex(a, slot);
  }
  throw ValidationError("unknown vertex tag '" + text + "'");
}

Mesh generate_mesh(double target_h, const FundamentalDomain &fd) {
  if (!(target_h >= kMinTargetH && target_h <= kMaxTargetH))
    throw UsageError(fmt::format("target_h = {} is outside [{}, {}]", target_h,
                                 kMinTargetH, kMaxTargetH));
  Mesh m;
  auto push = [&](Complex z, VertexTag tag) {
    m.points.emplace_back(z);
    m.tags.push_back(tag);
  };

  // Boundary arcs: master arcs split into equal hyperbolic segments, partner
  // arcs get the images.
  const int segments = static_cast<int>(std::ceil(fd.tau1 / target_h));
  std::array<std::vector<Complex>, 8> arc_points; // including both corners
  for (int a = 0; a < 4; ++a) {
    const auto [s, e] = fd.arcs[a].endpoints;
    const Complex p = fd.vertices[s].z(), q = fd.vertices[e].z();
    const MobiusMap &g = fd.arcs[a].pairing_map;
    for (int k = 0; k <= segments; ++k) {
      const Complex z =
          geodesic_point(p, q, static_cast<double>(k) / segments);
      arc_points[a].push_back(z);
      arc_points[a + 4].push_back(g.apply(z));
    }
  }

  const double gap = kBoundaryGap * target_h;
  auto clear_of_arcs = [&](Complex z, double min_dist) {
    if (!in_fundamental_domain(DiscPoint{z}, fd, 0.0))
      return false;
    for (const ArcDescriptor &arc : fd.arcs)
      if (dist_to_geodesic(z, arc.center, arc.radius) < min_dist)
        return false;
    return true;
  };

  // Boundary layer: one point per segment, at the apex of the equilateral
  // triangle raised inward on it.
  const double seg = fd.tau1 / segments;
  const double apex = 0.5 * std::sqrt(3.0) * seg;
  std::vector<Complex> layer;
  auto far_from = [](const std::vector<Complex> &pts, Complex z, double d) {
    for (const Complex &w : pts)
      if (hyp_dist(w, z) < d)
        return false;
    return true;
  };
  for (int a = 0; a < 8; ++a) {
    const auto &pts = arc_points[a];
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      const Complex mid = geodesic_point(pts[k], pts[k + 1], 0.5);
      // Chart centered at the segment midpoint.
      const Complex dir = (pts[k + 1] - mid) / (1.0 - std::conj(mid) * pts[k + 1]);
      const Complex normal = Complex{0.0, 1.0} * dir / std::abs(dir);
      for (double sign : {1.0, -1.0}) {
        const Complex w = sign * std::tanh(0.5 * apex) * normal;
        const Complex z = (w + mid) / (1.0 + std::conj(mid) * w);
        if (std::norm(z) < std::norm(mid) && clear_of_arcs(z, 0.5 * apex) &&
            far_from(layer, z, kLayerSpacing * target_h)) {
          layer.push_back(z);
          break;
        }
      }
    }
  }

  // Interior: concentric hyperbolic circles, kept clear of the layer.
  push({0.0, 0.0}, VertexTag::interior_vertex());
  const double outer = std::abs(fd.vertices[0].z());
  for (int k = 1;; ++k) {
    const double rho = k * target_h;
    const double r = std::tanh(0.5 * rho);
    if (r >= outer)
      break;
    const int n = static_cast<int>(std::ceil(2.0 * kPi * std::sinh(rho) / target_h));
    const double offset = (k % 2) ? kPi / n : 0.0;
    for (int i = 0; i < n; ++i) {
      const Complex z = std::polar(r, offset + 2.0 * kPi * i / n);
      if (clear_of_arcs(z, apex) &&
          far_from(layer, z, kLayerSpacing * target_h))
        push(z, VertexTag::interior_vertex());
    }
  }
  for (const Complex &z : layer)
    push(z, VertexTag::interior_vertex());

  for (int j = 0; j < 8; ++j)
    push(fd.vertices[j].z(), VertexTag::corner_vertex(j + 1));

  for (int a = 0; a < 8; ++a)
    for (int k = 1; k < segments; ++k)
      push(arc_points[a][k], VertexTag::arc_vertex(a, k));

  m.triangles = triangulate_domain(m, fd);
  const int n_interior = static_cast<int>(
      std::count(m.tags.begin(), m.tags.end(), VertexTag::interior_vertex()));
  for (int pass = 0; pass < kSmoothingPasses; ++pass) {
    smooth_interior(m, n_interior, fd, gap);
    m.triangles = triangulate_domain(m, fd);
  }

  validate_mesh(m, fd);
  return m;
}

void validate_mesh(const Mesh &m, const FundamentalDomain &fd) {
  const int nv = static_cast<int>(m.points.size());
  if (m.tags.size() != m.points.size())
    throw ValidationError("vertex and tag counts differ");
  if (m.triangles.empty())
    throw ValidationError("mesh has no triangles");

  std::map<EdgeKey, int> edge_count;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const Triangle &tri = m.triangles[t];
    for (int v : tri)
      if (v < 0 || v >= nv)
        triangle_error(t, fmt::format("vertex index {} out of range", v));
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      triangle_error(t, "repeated vertex");
    const double area2 = detail::orient2d(m.points[tri[0]].z(),
                                          m.points[tri[1]].z(),
                                          m.points[tri[2]].z());
    if (!(area2 > 0.0))
      triangle_error(t, area2 == 0.0 ? "degenerate (zero area)"
                                     : "not counterclockwise");
    for (int i = 0; i < 3; ++i)
      ++edge_count[edge_key(tri[i], tri[(i + 1) % 3])];
  }

  const auto chains = arc_chains(m, fd);

  for (int v = 0; v < nv; ++v) {
    const VertexTag &tag = m.tags[v];
    const Complex z = m.points[v].z();
    if (tag.kind == VertexTag::Kind::corner) {
      if (std::abs(z - fd.vertices[tag.corner - 1].z()) > kPairTol)
        vertex_error(v, fmt::format("corner {} is off its octagon vertex",
                                    tag.corner));
    } else if (tag.kind == VertexTag::Kind::arc) {
      if (!on_arc(z, fd.arcs[tag.arc], fd, kOnArcTol))
        vertex_error(v, fmt::format("not on arc {}", tag.arc));
    }
  }

  for (int a = 0; a < 4; ++a) {
    const MobiusMap &g = fd.arcs[a].pairing_map;
    const auto &master = chains[a];
    const auto &partner = chains[a + 4];
    for (std::size_t k = 1; k + 1 < master.size(); ++k) {
      const double err =
          std::abs(g.apply(m.points[master[k]].z()) - m.points[partner[k]].z());
      if (err > kPairTol)
        vertex_error(partner[k],
                     fmt::format("arc {} slot {} is {:.3e} away from the image "
                                 "of its partner (vertex {})",
                                 a + 4, k, err, master[k]));
    }
  }

  std::map<EdgeKey, int> chords;
  for (int a = 0; a < 8; ++a)
    for (std::size_t k = 0; k + 1 < chains[a].size(); ++k)
      chords[edge_key(chains[a][k], chains[a][k + 1])] = a;

  for (const auto &[e, count] : edge_count) {
    const bool is_chord = chords.count(e) > 0;
    if (count > 2 || (is_chord && count != 1) || (!is_chord && count != 2))
      throw MeshInvariantError(
          fmt::format("edge ({}, {}) is shared by {} triangles", e.first,
                      e.second, count),
          e.first, std::nullopt);
  }
  for (const auto &[e, a] : chords)
    if (!edge_count.count(e))
      throw MeshInvariantError(fmt::format("boundary chord ({}, {}) of arc {} "
                                           "is not a mesh edge",
                                           e.first, e.second, a),
                               e.first, std::nullopt);
}

double hyperbolic_triangle_area(Complex a, Complex b, Complex c) {
  const double area = 0.5 * std::abs(detail::orient2d(a, b, c));
  const double sum = area_density(0.5 * (a + b)) + area_density(0.5 * (b + c)) +
                     area_density(0.5 * (c + a));
  return area * sum / 3.0;
}

MeshQuality mesh_quality(const Mesh &m) {
  MeshQuality q;
  q.n_vertices = m.n_vertices();
  q.min_hyp_edge = std::numeric_limits<double>::infinity();
  double area = 0.0;
  for (const Triangle &t : m.triangles) {
    const Complex p[3] = {m.points[t[0]].z(), m.points[t[1]].z(),
                          m.points[t[2]].z()};
    for (int i = 0; i < 3; ++i) {
      const double d = hyp_dist(p[i], p[(i + 1) % 3]);
      q.max_hyp_edge = std::max(q.max_hyp_edge, d);
      q.min_hyp_edge = std::min(q.min_hyp_edge, d);
    }
    area += hyperbolic_triangle_area(p[0], p[1], p[2]);
  }
  q.area_ratio = area / (4.0 * kPi);
  return q;
}

void save_mesh(const Mesh &m, std::ostream &out) {
  fmt::print(out, "hypermesh 1\n");
  fmt::print(out, "vertices {}\n", m.points.size());
  for (std::size_t i = 0; i < m.points.size(); ++i)
    fmt::print(out, "{:.17g} {:.17g} {}\n", m.points[i].x(), m.points[i].y(),
               m.tags[i].to_string());
  fmt::print(out, "triangles {}\n", m.triangles.size());
  for (const Triangle &t : m.triangles)
    fmt::print(out, "{} {} {}\n", t[0], t[1], t[2]);
}

void save_mesh(const Mesh &m, const std::string &path) {
  std::ofstream out(path);
  if (!out)
    throw UsageError("cannot write mesh file '" + path + "'");
  save_mesh(m, out);
  if (!out)
    throw UsageError("error while writing mesh file '" + path + "'");
}

Mesh load_mesh(std::istream &in, bool validate) {
  int line_no = 0;
  std::string line;
  // Next non-empty line with comments stripped.
  auto next = [&]() -> std::optional<std::string> {
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos)
        line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        return line;
    }
    return std::nullopt;
  };
  auto fail = [&](const std::string &what) -> ValidationError {
    return ValidationError(fmt::format("line {}: {}", line_no, what));
  };
  auto read_count = [&](const std::string &keyword) {
    const auto text = next();
    if (!text)
      throw fail("unexpected end of file, expected '" + keyword + " N'");
    std::istringstream ss(*text);
    std::string word;
    long long n = -1;
    std::string extra;
    if (!(ss >> word >> n) || word != keyword || n < 0 || (ss >> extra))
      throw fail("expected '" + keyword + " N'");
    return static_cast<std::size_t>(n);
  };

  {
    const auto header = next();
    std::istringstream ss(header.value_or(""));
    std::string magic;
    int version = 0;
    std::string extra;
    if (!header || !(ss >> magic >> version) || magic != "hypermesh" ||
        version != 1 || (ss >> extra))
      throw fail("malformed header, expected 'hypermesh 1'");
  }

  Mesh m;
  std::vector<int> vertex_line;
  const std::size_t nv = read_count("vertices");
  for (std::size_t i = 0; i < nv; ++i) {
    const auto text = next();
    if (!text)
      throw fail("unexpected end of file in vertex list");
    std::istringstream ss(*text);
    double x = 0.0, y = 0.0;
    std::string tag, extra;
    if (!(ss >> x >> y >> tag) || (ss >> extra))
      throw fail("expected 'x y tag'");
    try {
      m.points.emplace_back(x, y);
      m.tags.push_back(VertexTag::parse(tag));
    } catch (const std::exception &e) {
      throw fail(e.what());
    }
    vertex_line.push_back(line_no);
  }
  const std::size_t nt = read_count("triangles");
  std::vector<int> triangle_line;
  for (std::size_t i = 0; i < nt; ++i) {
    const auto text = next();
    if (!text)
      throw fail("unexpected end of file in triangle list");
    std::istringstream ss(*text);
    long long a = 0, b = 0, c = 0;
    std::string extra;
    if (!(ss >> a >> b >> c) || (ss >> extra))
      throw fail("expected 'i j k'");
    for (long long v : {a, b, c})
      if (v < 0 || v >= static_cast<long long>(nv))
        throw fail(fmt::format("vertex index {} out of range", v));
    m.triangles.push_back(
        {static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)});
    triangle_line.push_back(line_no);
  }
  if (next())
    throw fail("trailing content after triangle list");

  if (!validate)
    return m;
  try {
    validate_mesh(m);
  } catch (const MeshInvariantError &e) {
    int where = line_no;
    if (e.vertex)
      where = vertex_line[*e.vertex];
    else if (e.triangle)
      where = triangle_line[*e.triangle];
    throw ValidationError(fmt::format("line {}: {}", where, e.what()));
  }
  return m;
}

Mesh load_mesh(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open mesh file '" + path + "'");
  try {
    return load_mesh(in);
  } catch (const ValidationError &e) {
    throw ValidationError(path + ": " + e.what());
  }
}

int nearest_vertex(const Mesh &m, Complex z) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int v = 0; v < static_cast<int>(m.points.size()); ++v) {
    const double d = hyp_dist(z, m.points[v].z());
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

} // namespace hypwave
