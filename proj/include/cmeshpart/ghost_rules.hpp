#pragma once

#include <map>
#include <vector>

#include "cmeshpart/cmesh.hpp"
#include "cmeshpart/comm_pattern.hpp"
#include "cmeshpart/connectivity.hpp"
#include "cmeshpart/offset_array.hpp"

namespace cmeshpart {

/// Face connection types as seen from one rank.
enum class ConnectionType : int {
  local_to_local = 1,
  local_to_ghost = 2,
  ghost_to_local = 3,
  ghost_to_ghost = 4,
  ghost_to_nonlocal = 5,
};

enum class EndpointKind { local, ghost };

/// `ghost_ids` must be sorted. Throws std::invalid_argument for a local tree
/// whose neighbor is neither local nor ghost (impossible in a consistent
/// Cmesh).
ConnectionType classify_connection(const OffsetArray& offsets, Rank p, EndpointKind from_kind,
                                   GlobalIndex to_global, std::span<const GlobalIndex> ghost_ids);
ConnectionType classify_connection(const Cmesh& c, EndpointKind from_kind, GlobalIndex to_global);

/// Face-neighbor ghost trees of rank p under `offsets`: every tree outside
/// p's range with a face neighbor inside it. Sorted.
std::vector<GlobalIndex> ghost_set(const OffsetArray& offsets, Rank p, const GlobalMesh& mesh);

/// Ghosts to ship, per destination rank, keyed by global id.
struct GhostPlan {
  std::map<Rank, std::map<GlobalIndex, GhostRecord>> by_destination;

  std::vector<GlobalIndex> ids_for(Rank q) const;
};

/// Whether rank c.rank is the one rank that sends `g` to q as a ghost: q does
/// not keep any face neighbor of g itself, and c.rank is the smallest rank
/// that sends a face neighbor of g to q. Needs no communication since g
/// carries the global indices of all its neighbors.
bool send_ghost(const Cmesh& c, const GhostRecord& g, Rank q, const OffsetArray& new_offsets);

/// Adds to `plan` the face neighbors of local tree `local` that rank c.rank
/// must ship to q as ghosts. `sent` is the tree range c.rank sends to q.
void parse_neighbors(const Cmesh& c, LocalIndex local, Rank q, const TreeRange& sent,
                     GhostPlan& plan, const OffsetArray& new_offsets);

/// Ghosts c.rank keeps for itself: neighbors outside its new range of the
/// trees it keeps. Sorted by id.
std::vector<GhostRecord> retained_ghosts(const Cmesh& c, const OffsetArray& new_offsets);

}  // namespace cmeshpart
