#include "cmeshpart/ghost_rules.hpp"

#include <algorithm>
#include <stdexcept>

namespace cmeshpart {

ConnectionType classify_connection(const OffsetArray& offsets, Rank p, EndpointKind from_kind,
                                   GlobalIndex to_global, std::span<const GlobalIndex> ghost_ids) {
  const bool to_local = offsets.contains(p, to_global);
  const bool to_ghost =
      !to_local && std::binary_search(ghost_ids.begin(), ghost_ids.end(), to_global);
  if (from_kind == EndpointKind::local) {
    if (to_local) return ConnectionType::local_to_local;
    if (to_ghost) return ConnectionType::local_to_ghost;
    throw std::invalid_argument("local tree neighbor " + std::to_string(to_global) +
                                " is neither local nor ghost");
  }
  if (to_local) return ConnectionType::ghost_to_local;
  if (to_ghost) return ConnectionType::ghost_to_ghost;
  return ConnectionType::ghost_to_nonlocal;
}

ConnectionType classify_connection(const Cmesh& c, EndpointKind from_kind, GlobalIndex to_global) {
  std::vector<GlobalIndex> ids;
  ids.reserve(c.ghosts.size());
  for (const auto& g : c.ghosts) ids.push_back(g.id);
  std::sort(ids.begin(), ids.end());
  return classify_connection(c.offsets, c.rank, from_kind, to_global, ids);
}

std::vector<GlobalIndex> ghost_set(const OffsetArray& offsets, Rank p, const GlobalMesh& mesh) {
  std::vector<GlobalIndex> out;
  for (GlobalIndex k = offsets.first_tree(p); k <= offsets.last_tree(p); ++k) {
    for (GlobalIndex n : mesh.trees.at(k).neighbors) {
      if (!offsets.contains(p, n)) out.push_back(n);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<GlobalIndex> GhostPlan::ids_for(Rank q) const {
  std::vector<GlobalIndex> out;
  if (auto it = by_destination.find(q); it != by_destination.end()) {
    for (const auto& [id, rec] : it->second) out.push_back(id);
  }
  return out;
}

bool send_ghost(const Cmesh& c, const GhostRecord& g, Rank q, const OffsetArray& new_offsets) {
  Rank min_sender = -1;
  for (GlobalIndex u : g.tree_to_tree) {
    if (!new_offsets.contains(q, u)) continue;
    const Rank s = sender_of_tree(c.offsets, new_offsets, u, q);
    if (s == q) return false;
    if (min_sender < 0 || s < min_sender) min_sender = s;
  }
  return min_sender == c.rank;
}

void parse_neighbors(const Cmesh& c, LocalIndex local, Rank q, const TreeRange& sent,
                     GhostPlan& plan, const OffsetArray& new_offsets) {
  const auto& tree = c.trees.at(local);
  auto& dest = plan.by_destination[q];
  for (LocalIndex u : tree.tree_to_tree) {
    const GlobalIndex id = c.resolve(u);
    if (sent.contains(id) || dest.contains(id)) continue;
    if (new_offsets.contains(q, id)) continue;
    if (c.is_local_index(u)) {
      auto g = ghost_of_local(c, u);
      if (send_ghost(c, g, q, new_offsets)) dest.emplace(id, std::move(g));
    } else {
      const auto& g = c.ghosts[u - c.num_local()];
      if (send_ghost(c, g, q, new_offsets)) dest.emplace(id, g);
    }
  }
}

std::vector<GhostRecord> retained_ghosts(const Cmesh& c, const OffsetArray& new_offsets) {
  std::map<GlobalIndex, GhostRecord> keep;
  const Rank p = c.rank;
  const auto kept = send_range(c.offsets, new_offsets, p, p);
  if (!kept) return {};
  for (GlobalIndex k = kept->first; k <= kept->last; ++k) {
    const auto local = static_cast<LocalIndex>(k - c.first_tree());
    for (LocalIndex u : c.trees[local].tree_to_tree) {
      const GlobalIndex id = c.resolve(u);
      if (new_offsets.contains(p, id) || keep.contains(id)) continue;
      if (c.is_local_index(u)) {
        keep.emplace(id, ghost_of_local(c, u));
      } else {
        keep.emplace(id, c.ghosts[u - c.num_local()]);
      }
    }
  }
  std::vector<GhostRecord> out;
  out.reserve(keep.size());
  for (auto& [id, g] : keep) out.push_back(std::move(g));
  return out;
}

}  // namespace cmeshpart
