#pragma once

#include <optional>
#include <vector>

#include "cmeshpart/offset_array.hpp"
#include "cmeshpart/types.hpp"

namespace cmeshpart {

/// Contiguous range of global tree indices, inclusive on both ends.
struct TreeRange {
  GlobalIndex first = 0;
  GlobalIndex last = -1;

  GlobalIndex count() const { return last - first + 1; }
  bool contains(GlobalIndex k) const { return first <= k && k <= last; }
  friend bool operator==(const TreeRange&, const TreeRange&) = default;
};

/// Who rank `rank` sends local trees to and receives them from during a
/// repartition. Both rank lists are ascending and may contain `rank`
/// itself (local data movement). send_ranges[i] belongs to senders_to[i].
struct CommPattern {
  Rank rank = 0;
  std::vector<Rank> senders_to;
  std::vector<Rank> receive_from;
  std::vector<TreeRange> send_ranges;
};

/// Smallest rank holding tree k in `offsets`.
Rank min_owner(const OffsetArray& offsets, GlobalIndex k);

/// The rank that delivers tree k to p: p itself if it already holds k,
/// otherwise the smallest old owner. Throws std::invalid_argument if
/// k is not in p's new range.
Rank sender_of_tree(const OffsetArray& old_offsets, const OffsetArray& new_offsets,
                    GlobalIndex k, Rank p);

/// Whether rank `from` sends at least one local tree to `to`. Constant time.
bool sends_to(const OffsetArray& old_offsets, const OffsetArray& new_offsets, Rank from,
              Rank to);

/// Trees `from` sends to `to`, or nullopt if none.
std::optional<TreeRange> send_range(const OffsetArray& old_offsets,
                                    const OffsetArray& new_offsets, Rank from, Rank to);

/// S_p: ranks p sends local trees to, ascending.
std::vector<Rank> compute_S(const OffsetArray& old_offsets, const OffsetArray& new_offsets,
                            Rank p);

/// R_p: ranks p receives local trees from, ascending.
std::vector<Rank> compute_R(const OffsetArray& old_offsets, const OffsetArray& new_offsets,
                            Rank p);

/// Throws PartitionError if the two tables disagree on P or K.
CommPattern compute_pattern(const OffsetArray& old_offsets, const OffsetArray& new_offsets,
                            Rank p);

}  // namespace cmeshpart
