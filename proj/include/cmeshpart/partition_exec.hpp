#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmeshpart/cmesh.hpp"
#include "cmeshpart/comm_pattern.hpp"
#include "cmeshpart/offset_array.hpp"

namespace cmeshpart {

/// A local tree in transit. Neighbor entries >= 0 are already local indices
/// on the destination; an entry < 0 encodes a future ghost as -(global)-1
/// and is resolved by update_ids_phase2.
struct WireTree {
  GlobalIndex id = 0;
  TreeClass eclass = TreeClass::quad;
  std::vector<GlobalIndex> neighbors;
  std::vector<FaceCode> faces;
  TreeData data;

  friend bool operator==(const WireTree&, const WireTree&) = default;
};

inline constexpr GlobalIndex pending_ghost(GlobalIndex id) { return -id - 1; }

/// Serialized trees and ghosts from one rank to another. Messages with
/// from == to are local data movement and never touch the wire.
struct RankMessage {
  Rank from = 0;
  Rank to = 0;
  std::uint32_t ntrees = 0;
  std::uint32_t nghosts = 0;
  std::vector<std::uint8_t> payload;

  bool on_wire() const { return from != to; }
  std::size_t byte_length() const { return payload.size(); }
  /// `msg v1 from=<p> to=<q> ntrees=<n> nghosts=<m>`
  std::string header() const;
};

/// Binary payload, little-endian fixed width:
///   tree:  i64 id, u8 class, per face (i64 neighbor, i32 face code),
///          u32 data length, data bytes
///   ghost: i64 id, u8 class, per face (i64 global neighbor, i32 face code)
/// Trees come first, then ghosts.
RankMessage make_message(Rank from, Rank to, std::span<const WireTree> trees,
                         std::span<const GhostRecord> ghosts);

struct MessageContents {
  std::vector<WireTree> trees;
  std::vector<GhostRecord> ghosts;
};
/// Throws ParseError on truncated or malformed payloads.
MessageContents read_message(const RankMessage& msg);

/// Header line, newline, raw payload.
std::string frame_message(const RankMessage& msg);
RankMessage unframe_message(std::string_view framed);

/// New local index of a tree that had local index `old_local` on a rank
/// whose first tree was `old_first`. Throws ConsistencyError if the result
/// falls outside [0, new_count).
LocalIndex new_local_index_of_local(GlobalIndex old_first, LocalIndex old_local,
                                    GlobalIndex new_first, LocalIndex new_count);
/// New local index of a ghost with global id `id` that becomes local.
LocalIndex new_local_index_of_ghost(GlobalIndex id, GlobalIndex new_first, LocalIndex new_count);

/// First index update, done by the sender: neighbor entries that will be
/// local on `dest` become local indices there, the rest stay global.
WireTree update_ids_phase1(const Cmesh& c, LocalIndex local, const OffsetArray& new_offsets,
                           Rank dest);

/// Received data before ghost indices are known.
struct IncomingCmesh {
  Rank rank = 0;
  int dim = 2;
  OffsetArray offsets;
  std::vector<WireTree> trees;      // ascending global index
  std::vector<GhostRecord> ghosts;  // grouped by sender rank ascending
};

/// Second index update, done by the receiver: ghost j gets local index
/// n_local + j and is written into the neighbor slots of the local trees it
/// touches. Throws ConsistencyError if a slot stays unresolved.
Cmesh update_ids_phase2(IncomingCmesh incoming);

/// What one rank ships to one destination.
struct OutgoingPlan {
  Rank to = 0;
  TreeRange trees;
  std::vector<GhostRecord> ghosts;  // sorted by id
};

/// Sending decisions of rank c.rank for every q in S_p, including the
/// retained data for q = p.
std::vector<OutgoingPlan> plan_sends(const Cmesh& c, const OffsetArray& new_offsets);

/// Sending phase: one message per q in S_p (including the self message).
std::vector<RankMessage> send_phase(const Cmesh& c, const OffsetArray& new_offsets);

/// Receiving phase. `mailbox` holds the messages addressed to c.rank in any
/// order; their senders must be exactly R_p.
Cmesh receive_phase(const Cmesh& c, const OffsetArray& new_offsets,
                    std::span<const RankMessage> mailbox);

/// Transport between ranks. send() may be called concurrently by all ranks;
/// barrier() separates sending and receiving.
class Mailbox {
 public:
  virtual ~Mailbox() = default;
  virtual void send(RankMessage msg) = 0;
  virtual void barrier() = 0;
  virtual std::vector<RankMessage> receive(Rank p) = 0;
};

/// Repartitions c to `new_offsets`. Every rank calls this collectively.
/// Throws PartitionError if new_offsets is invalid or K differs.
Cmesh partition_cmesh(const Cmesh& c, const OffsetArray& new_offsets, Mailbox& mailbox);

}  // namespace cmeshpart
