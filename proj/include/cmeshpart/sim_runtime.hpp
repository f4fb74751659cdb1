#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmeshpart/cmesh.hpp"
#include "cmeshpart/connectivity.hpp"
#include "cmeshpart/offset_array.hpp"
#include "cmeshpart/partition_exec.hpp"

namespace cmeshpart {

/// A partition step failed on a specific rank.
class RankError : public std::runtime_error {
 public:
  RankError(Rank rank, const std::string& what)
      : std::runtime_error("rank " + std::to_string(rank) + ": " + what), rank_(rank) {}
  Rank rank() const { return rank_; }

 private:
  Rank rank_;
};

/// P simulated ranks, each exclusively owning one Cmesh. Cross-rank data only
/// moves through RankMessage during run_repartition.
class World {
 public:
  World() = default;
  explicit World(std::vector<Cmesh> ranks);

  /// Hands every rank its part of `mesh` under `offsets`.
  static World distribute(const GlobalMesh& mesh, const OffsetArray& offsets);

  int size() const { return static_cast<int>(ranks_.size()); }
  const Cmesh& rank(Rank p) const { return ranks_.at(p); }
  Cmesh& rank_mut(Rank p) { return ranks_.at(p); }
  const std::vector<Cmesh>& ranks() const { return ranks_; }
  const OffsetArray& offsets() const { return ranks_.front().offsets; }
  std::uint64_t step() const { return step_; }

  /// Replaces the rank states after a completed step.
  void commit(std::vector<Cmesh> ranks);

 private:
  std::vector<Cmesh> ranks_;
  std::uint64_t step_ = 0;
};

struct RankStats {
  Rank rank = 0;
  std::int64_t trees_sent = 0;   // over the wire only
  std::int64_t ghosts_sent = 0;  // over the wire only
  std::int64_t bytes_sent = 0;   // payload bytes over the wire
  std::int64_t messages_sent = 0;
  std::int64_t S_size = 0;  // |S_p|, including p itself
};

/// Ids carried by one message, recorded on request.
struct MessageLog {
  Rank from = 0;
  Rank to = 0;
  std::vector<GlobalIndex> trees;
  std::vector<GlobalIndex> ghosts;
};

struct PartitionStats {
  std::vector<RankStats> per_rank;
  GlobalIndex num_trees = 0;
  GlobalIndex shared_tree_count = 0;  // in the new partition
  double wall_time_s = 0;
  std::vector<MessageLog> messages;  // only with RepartitionOptions::record_messages

  std::int64_t total_trees_sent() const;
  std::int64_t total_ghosts_sent() const;
  std::int64_t total_bytes_sent() const;
  std::int64_t wire_messages() const;
  double mean_S_size() const;

  /// `rank,trees_sent,ghosts_sent,bytes,S_size`, one row per rank.
  std::string to_csv() const;
  /// Aggregate values as a JSON object.
  std::string to_json() const;
};

struct RepartitionOptions {
  int threads = 0;                 // 0: hardware concurrency
  std::uint64_t schedule_seed = 0; // 0: ranks in order; otherwise a shuffled order
  bool record_messages = false;
  std::string dump_dir;            // write every message here if set
};

/// Runs one repartition of all ranks to `new_offsets`: sending phase on all
/// ranks, barrier, receiving phase. The world is only modified on success.
/// Throws PartitionError for an unusable `new_offsets`, RankError if a rank
/// fails.
PartitionStats run_repartition(World& world, const OffsetArray& new_offsets,
                               const RepartitionOptions& options = {});

struct VerifyReport {
  std::vector<std::string> diffs;
  bool ok() const { return diffs.empty(); }
};

/// Compares every rank's local trees and ghosts with `reference` and with the
/// ghost definition under the world's current partition.
VerifyReport verify_world(const World& world, const GlobalMesh& reference);

/// Deterministic text rendering of all rank states, used to compare runs.
std::string serialize_world(const World& world);

}  // namespace cmeshpart
