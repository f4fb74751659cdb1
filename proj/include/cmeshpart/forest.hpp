#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cmeshpart/offset_array.hpp"
#include "cmeshpart/types.hpp"

namespace cmeshpart {

/// Leaf counts per tree of a forest whose leaves are ordered tree-major,
/// (k, I) < (k', J) iff k < k' or (k == k' and I < J). Per-leaf weights are
/// optional; if present there is one per leaf in that order.
struct ForestSummary {
  std::vector<std::int64_t> leaf_counts;
  std::vector<double> weights;

  GlobalIndex num_trees() const { return static_cast<GlobalIndex>(leaf_counts.size()); }
  std::int64_t num_leaves() const;
  bool weighted() const { return !weights.empty(); }

  friend bool operator==(const ForestSummary&, const ForestSummary&) = default;
};

/// Half-open leaf range [begin, end) per rank, nondecreasing and covering
/// [0, N).
using LeafCuts = std::vector<std::int64_t>;  // size P+1, cuts[0]=0, cuts[P]=N

/// Equal split: rank p owns leaves [floor(pN/P), floor((p+1)N/P)).
LeafCuts equal_leaf_cuts(std::int64_t num_leaves, int P);

/// Greedy weighted split: rank p's range ends at the smallest prefix whose
/// cumulative weight is >= (p+1) W / P; the last rank ends at N.
LeafCuts weighted_leaf_cuts(const std::vector<double>& weights, int P);

/// Coarse mesh partition induced by a leaf partition: rank p holds every tree
/// it owns at least one leaf of.
OffsetArray partition_from_cuts(const ForestSummary& forest, const LeafCuts& cuts);

/// Uses weighted_leaf_cuts if the forest carries weights, equal_leaf_cuts
/// otherwise.
OffsetArray partition_from_forest(const ForestSummary& forest, int P);

/// Leaf counts c^base_level per tree, c^(base_level+1) inside the band, with
/// c = 4 in 2D and 8 in 3D. Throws RangeError on 64-bit overflow.
ForestSummary synthetic_band_forest(GlobalIndex K, int base_level,
                                    const std::set<GlobalIndex>& refined_trees, int dim);

/// A forest and leaf cuts that induce `offsets`. Trees held by one rank get
/// one leaf; a tree shared by m ranks is refined uniformly (4 children per
/// level) until it has more than m leaves, and every sharer except the last
/// takes one leaf of it.
struct WitnessForest {
  ForestSummary forest;
  LeafCuts cuts;
};
WitnessForest witness_forest(const OffsetArray& offsets);

/// `forest K=<K> : N_0 N_1 ...`
std::string to_string(const ForestSummary& forest);
/// Throws ParseError.
ForestSummary parse_forest(std::string_view line);

}  // namespace cmeshpart
