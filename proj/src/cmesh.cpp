#include "cmeshpart/cmesh.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

namespace cmeshpart {

GlobalIndex Cmesh::resolve(LocalIndex u) const {
  if (u < 0 || u >= num_local() + num_ghosts()) {
    throw RangeError("local index " + std::to_string(u) + " out of range on rank " +
                     std::to_string(rank));
  }
  if (u < num_local()) return global_id(u);
  return ghosts[u - num_local()].id;
}

std::optional<GlobalIndex> neighbor_global_index(const Cmesh& c, LocalIndex local, int face) {
  if (local < 0 || local >= c.num_local()) {
    throw RangeError("tree " + std::to_string(local) + " is not local on rank " +
                     std::to_string(c.rank));
  }
  const auto& t = c.trees[local];
  if (face < 0 || face >= static_cast<int>(t.tree_to_tree.size())) {
    throw RangeError("face " + std::to_string(face) + " out of range");
  }
  const LocalIndex u = t.tree_to_tree[face];
  if (u == local && t.tree_to_face[face].neighbor_face(c.dim) == face) return std::nullopt;
  return c.resolve(u);
}

std::vector<GlobalIndex> global_neighbors(const Cmesh& c, LocalIndex local) {
  const auto& t = c.trees.at(local);
  std::vector<GlobalIndex> out(t.tree_to_tree.size());
  for (std::size_t f = 0; f < out.size(); ++f) out[f] = c.resolve(t.tree_to_tree[f]);
  return out;
}

GhostRecord ghost_of_local(const Cmesh& c, LocalIndex local) {
  const auto& t = c.trees.at(local);
  return {c.global_id(local), t.eclass, global_neighbors(c, local), t.tree_to_face};
}

Cmesh extract_cmesh(const GlobalMesh& mesh, const OffsetArray& offsets, Rank p) {
  if (offsets.num_trees() != mesh.num_trees()) {
    throw PartitionError("offset array has K=" + std::to_string(offsets.num_trees()) +
                         " but the mesh has " + std::to_string(mesh.num_trees()) + " trees");
  }
  Cmesh c;
  c.rank = p;
  c.dim = mesh.dim;
  c.offsets = offsets;
  const GlobalIndex first = offsets.first_tree(p);
  const GlobalIndex last = offsets.last_tree(p);

  std::vector<GlobalIndex> ghost_ids;
  for (GlobalIndex k = first; k <= last; ++k) {
    for (GlobalIndex n : mesh.trees[k].neighbors) {
      if (n < first || n > last) ghost_ids.push_back(n);
    }
  }
  std::sort(ghost_ids.begin(), ghost_ids.end());
  ghost_ids.erase(std::unique(ghost_ids.begin(), ghost_ids.end()), ghost_ids.end());

  const auto n_local = static_cast<LocalIndex>(last - first + 1);
  auto local_index_of = [&](GlobalIndex n) -> LocalIndex {
    if (n >= first && n <= last) return static_cast<LocalIndex>(n - first);
    auto it = std::lower_bound(ghost_ids.begin(), ghost_ids.end(), n);
    return n_local + static_cast<LocalIndex>(it - ghost_ids.begin());
  };

  c.trees.reserve(std::max<LocalIndex>(n_local, 0));
  for (GlobalIndex k = first; k <= last; ++k) {
    const auto& gt = mesh.trees[k];
    LocalTree t;
    t.eclass = gt.eclass;
    t.tree_to_face = gt.faces;
    t.tree_data = gt.data;
    t.tree_to_tree.reserve(gt.neighbors.size());
    for (GlobalIndex n : gt.neighbors) t.tree_to_tree.push_back(local_index_of(n));
    c.trees.push_back(std::move(t));
  }
  c.ghosts.reserve(ghost_ids.size());
  for (GlobalIndex g : ghost_ids) {
    const auto& gt = mesh.trees[g];
    c.ghosts.push_back({g, gt.eclass, gt.neighbors, gt.faces});
  }
  return c;
}

std::vector<std::string> check_cmesh(const Cmesh& c) {
  std::vector<std::string> out;
  const std::string where = "rank " + std::to_string(c.rank) + ": ";
  if (c.rank < 0 || c.rank >= c.world_size()) {
    out.push_back(where + "rank outside the offset table");
    return out;
  }
  if (c.num_local() != std::max<LocalIndex>(c.offsets.num_local_trees(c.rank), 0)) {
    out.push_back(where + "holds " + std::to_string(c.num_local()) + " trees, offsets say " +
                  std::to_string(c.offsets.num_local_trees(c.rank)));
  }
  const LocalIndex total = c.num_local() + c.num_ghosts();
  for (LocalIndex l = 0; l < c.num_local(); ++l) {
    const auto& t = c.trees[l];
    if (static_cast<int>(t.tree_to_tree.size()) != num_faces(t.eclass) ||
        t.tree_to_face.size() != t.tree_to_tree.size()) {
      out.push_back(where + "tree " + std::to_string(l) + " has a malformed face array");
      continue;
    }
    for (std::size_t f = 0; f < t.tree_to_tree.size(); ++f) {
      const LocalIndex u = t.tree_to_tree[f];
      if (u < 0 || u >= total) {
        out.push_back(where + "tree " + std::to_string(c.global_id(l)) + " face " +
                      std::to_string(f) + " points at local index " + std::to_string(u) +
                      " outside [0, " + std::to_string(total) + ")");
      }
    }
  }
  std::unordered_map<GlobalIndex, int> seen;
  for (const auto& g : c.ghosts) {
    if (c.offsets.contains(c.rank, g.id)) {
      out.push_back(where + "ghost " + std::to_string(g.id) + " is also a local tree");
    }
    if (++seen[g.id] > 1) out.push_back(where + "ghost " + std::to_string(g.id) + " duplicated");
  }
  return out;
}

}  // namespace cmeshpart
