#pragma once

#include <optional>
#include <vector>

#include "cmeshpart/connectivity.hpp"
#include "cmeshpart/offset_array.hpp"
#include "cmeshpart/tree_class.hpp"
#include "cmeshpart/types.hpp"

namespace cmeshpart {

/// A local tree. `tree_to_tree[i]` is a local index u: u < n_local names a
/// local tree, otherwise the ghost u - n_local. A face pointing at the tree
/// itself with the same face number is a domain boundary.
struct LocalTree {
  TreeClass eclass = TreeClass::quad;
  std::vector<LocalIndex> tree_to_tree;
  std::vector<FaceCode> tree_to_face;
  TreeData tree_data;

  friend bool operator==(const LocalTree&, const LocalTree&) = default;
};

/// A non-local face neighbor of a local tree. Its neighbors are stored by
/// global index, including trees that are neither local nor ghost here.
struct GhostRecord {
  GlobalIndex id = 0;
  TreeClass eclass = TreeClass::quad;
  std::vector<GlobalIndex> tree_to_tree;
  std::vector<FaceCode> tree_to_face;

  friend bool operator==(const GhostRecord&, const GhostRecord&) = default;
};

/// Boundary marker returned by neighbor_global_index.
struct Boundary {
  friend bool operator==(Boundary, Boundary) = default;
};

/// The part of a partitioned coarse mesh owned by one rank.
struct Cmesh {
  Rank rank = 0;
  int dim = 2;
  OffsetArray offsets;
  std::vector<LocalTree> trees;  // ascending global index, k = first_tree() + local index
  std::vector<GhostRecord> ghosts;

  int world_size() const { return offsets.world_size(); }
  LocalIndex num_local() const { return static_cast<LocalIndex>(trees.size()); }
  LocalIndex num_ghosts() const { return static_cast<LocalIndex>(ghosts.size()); }
  GlobalIndex first_tree() const { return offsets.first_tree(rank); }

  GlobalIndex global_id(LocalIndex local) const { return first_tree() + local; }
  bool is_local_index(LocalIndex u) const { return u >= 0 && u < num_local(); }

  /// Global index of tree-or-ghost local index u. Throws RangeError.
  GlobalIndex resolve(LocalIndex u) const;

  friend bool operator==(const Cmesh&, const Cmesh&) = default;
};

/// Global index of the neighbor of local tree `local` across `face`, or
/// std::nullopt for a boundary face. Throws RangeError for bad indices.
std::optional<GlobalIndex> neighbor_global_index(const Cmesh& c, LocalIndex local, int face);

/// Global neighbor list of a local tree (boundary faces map to the tree
/// itself, as in GlobalTree).
std::vector<GlobalIndex> global_neighbors(const Cmesh& c, LocalIndex local);

/// Ghost record describing local tree `local`, as another rank would store it.
GhostRecord ghost_of_local(const Cmesh& c, LocalIndex local);

/// Builds rank p's part of `mesh` under `offsets` directly from the global
/// connectivity. Ghosts are sorted by global index.
Cmesh extract_cmesh(const GlobalMesh& mesh, const OffsetArray& offsets, Rank p);

/// Checks n_local against the offset table, index ranges and ascending order
/// of local data. Returns a list of problems (empty = consistent).
std::vector<std::string> check_cmesh(const Cmesh& c);

}  // namespace cmeshpart
