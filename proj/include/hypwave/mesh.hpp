/**
 * @file mesh.hpp
 * @brief Triangulations of the fundamental octagon.
 *
 * Boundary vertices carry combinatorial tags so that paired arcs can be
 * matched node-for-node without a floating-point search: the vertex tagged
 * (arc a, slot s) on a master arc and the one tagged (arc a+4, slot s) are
 * images of each other under the arc's pairing map.
 */
#pragma once

#include "hypwave/hyperbolic.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hypwave {

struct VertexTag {
  enum class Kind : std::uint8_t { interior, arc, corner };

  Kind kind = Kind::interior;
  int arc = -1;    // arc id 0..7 for Kind::arc
  int slot = -1;   // 1..n-1 along the arc for Kind::arc
  int corner = -1; // 1..8 for Kind::corner

  static VertexTag interior_vertex() { return {}; }
  static VertexTag arc_vertex(int a, int s) { return {Kind::arc, a, s, -1}; }
  static VertexTag corner_vertex(int j) { return {Kind::corner, -1, -1, j}; }

  bool is_boundary() const { return kind != Kind::interior; }

  /// `interior`, `arc:a:s` or `corner:j`.
  std::string to_string() const;
  /// Throws ValidationError on malformed text.
  static VertexTag parse(const std::string &text);

  friend bool operator==(const VertexTag &, const VertexTag &) = default;
};

using Triangle = std::array<int, 3>;

struct Mesh {
  std::vector<DiscPoint> points;
  std::vector<VertexTag> tags;
  std::vector<Triangle> triangles; // counterclockwise

  std::size_t n_vertices() const { return points.size(); }
};

struct MeshQuality {
  std::size_t n_vertices = 0;
  double max_hyp_edge = 0.0;
  double min_hyp_edge = 0.0;
  double area_ratio = 0.0; // hyperbolic area / 4 pi
};

inline constexpr double kMinTargetH = 0.02;
inline constexpr double kMaxTargetH = 0.5;

/// Deterministic quasi-uniform mesh with hyperbolic edge length about
/// target_h. Throws UsageError when target_h is outside [0.02, 0.5] and
/// NumericalError if the triangulation does not conform to the boundary.
Mesh generate_mesh(double target_h,
                   const FundamentalDomain &fd = fundamental_domain());

/// Checks every Mesh invariant; throws ValidationError naming the first
/// offending vertex, edge or triangle.
void validate_mesh(const Mesh &m,
                   const FundamentalDomain &fd = fundamental_domain());

/// Hyperbolic area of a triangle with the three-edge-midpoint rule.
double hyperbolic_triangle_area(Complex a, Complex b, Complex c);

MeshQuality mesh_quality(const Mesh &m);

/// Line-oriented text format, 17 significant digits.
void save_mesh(const Mesh &m, std::ostream &out);
void save_mesh(const Mesh &m, const std::string &path);
/// Parses and validates. Errors carry the offending line number. With
/// `validate` false only the syntax and index ranges are checked.
Mesh load_mesh(std::istream &in, bool validate = true);
Mesh load_mesh(const std::string &path);

/// Index of the mesh vertex nearest to z in the hyperbolic metric.
int nearest_vertex(const Mesh &m, Complex z);

} // namespace hypwave
