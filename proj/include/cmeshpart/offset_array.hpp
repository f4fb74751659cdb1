#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmeshpart/types.hpp"

namespace cmeshpart {

/// Tree range of one rank. Empty ranks carry first = K_q + 1 and
/// last = first - 1 for the largest nonempty rank q below them (first = 0,
/// last = -1 if there is none).
struct RankRange {
  GlobalIndex first = 0;
  GlobalIndex last = -1;
  bool first_shared = false;

  bool empty() const { return last < first; }
  GlobalIndex count() const { return last - first + 1; }
  bool contains(GlobalIndex k) const { return first <= k && k <= last; }

  friend bool operator==(const RankRange&, const RankRange&) = default;
};

/// Decoded form of a coarse mesh partition.
struct PartitionView {
  GlobalIndex num_trees = 0;
  std::vector<RankRange> ranks;

  friend bool operator==(const PartitionView&, const PartitionView&) = default;
};

struct ValidityReport {
  std::vector<std::string> diagnostics;
  bool valid() const { return diagnostics.empty(); }
  explicit operator bool() const { return valid(); }
};

/// Signed partition table of length P+1. Entry p is k_p, or -k_p-1 when the
/// first tree of p is shared with the next smaller nonempty rank; the last
/// entry is K. Immutable once built.
class OffsetArray {
 public:
  OffsetArray() = default;

  /// Checks only the structural shape (length >= 2, entries[0] == 0,
  /// entries[P] >= 0); semantic validity is reported by is_valid().
  static OffsetArray from_entries(std::vector<GlobalIndex> entries);

  int world_size() const { return static_cast<int>(entries_.size()) - 1; }
  GlobalIndex num_trees() const { return entries_.back(); }
  std::span<const GlobalIndex> entries() const { return entries_; }

  GlobalIndex first_tree(Rank p) const;
  GlobalIndex last_tree(Rank p) const;
  LocalIndex num_local_trees(Rank p) const;
  bool first_shared(Rank p) const;
  bool empty(Rank p) const { return num_local_trees(p) <= 0; }
  bool contains(Rank p, GlobalIndex k) const {
    return first_tree(p) <= k && k <= last_tree(p);
  }
  RankRange range(Rank p) const { return {first_tree(p), last_tree(p), first_shared(p)}; }

  friend bool operator==(const OffsetArray&, const OffsetArray&) = default;

 private:
  explicit OffsetArray(std::vector<GlobalIndex> e) : entries_(std::move(e)) {}
  void check_rank(Rank p) const;

  std::vector<GlobalIndex> entries_{0, 0};
};

/// Throws PartitionError naming the first violated property.
OffsetArray encode_offsets(const PartitionView& view);
PartitionView decode_offsets(const OffsetArray& offsets);

ValidityReport is_valid(const OffsetArray& offsets);
ValidityReport is_valid(const PartitionView& view);

/// Number of trees held by more than one rank.
GlobalIndex shared_tree_count(const OffsetArray& offsets);

/// `offsets P=<P> K=<K> : v0 v1 ... vP`
std::string to_string(const OffsetArray& offsets);
/// Throws ParseError.
OffsetArray parse_offsets(std::string_view line);

}  // namespace cmeshpart
