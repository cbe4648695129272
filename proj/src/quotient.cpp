#include "hypwave/quotient.hpp"

#include "hypwave/error.hpp"

#include <fmt/format.h>

#include <map>

namespace hypwave {

DofMap build_dof_map(const Mesh &m) {
  const int nv = static_cast<int>(m.n_vertices());
  DofMap dm;
  dm.vertex_to_dof.assign(nv, -1);

  int next = 0;
  for (int v = 0; v < nv; ++v)
    if (m.tags[v].kind == VertexTag::Kind::interior)
      dm.vertex_to_dof[v] = next++;

  // (arc, slot) -> vertex, masters and partners separately.
  std::map<std::pair<int, int>, int> master, partner;
  for (int v = 0; v < nv; ++v) {
    const VertexTag &t = m.tags[v];
    if (t.kind != VertexTag::Kind::arc)
      continue;
    auto &side = t.arc < 4 ? master : partner;
    side[{t.arc, t.slot}] = v;
  }
  for (const auto &[key, v] : master) {
    const auto it = partner.find({key.first + 4, key.second});
    if (it == partner.end())
      throw ValidationError(fmt::format(
          "vertex {} (arc {} slot {}) has no partner on arc {}", v, key.first,
          key.second, key.first + 4));
    dm.vertex_to_dof[v] = next;
    dm.vertex_to_dof[it->second] = next;
    ++next;
    partner.erase(it);
  }
  if (!partner.empty()) {
    const auto &[key, v] = *partner.begin();
    throw ValidationError(fmt::format(
        "vertex {} (arc {} slot {}) has no partner on arc {}", v, key.first,
        key.second, key.first - 4));
  }

  const int corner = next++;
  for (int v = 0; v < nv; ++v)
    if (m.tags[v].kind == VertexTag::Kind::corner)
      dm.vertex_to_dof[v] = corner;

  dm.n_dofs = next;
  dm.class_sizes.assign(dm.n_dofs, 0);
  for (int d : dm.vertex_to_dof)
    ++dm.class_sizes[d];
  return dm;
}

std::vector<double> DofMap::expand(std::span<const double> dofs) const {
  std::vector<double> out(vertex_to_dof.size());
  for (std::size_t v = 0; v < vertex_to_dof.size(); ++v)
    out[v] = dofs[vertex_to_dof[v]];
  return out;
}

std::vector<double>
DofMap::restrict_to_dofs(std::span<const double> vertex_values) const {
  std::vector<double> out(n_dofs, 0.0);
  std::vector<char> seen(n_dofs, 0);
  for (std::size_t v = 0; v < vertex_to_dof.size(); ++v) {
    const int d = vertex_to_dof[v];
    if (!seen[d]) {
      out[d] = vertex_values[v];
      seen[d] = 1;
    }
  }
  return out;
}

} // namespace hypwave
