#include "cmeshpart/forest.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <sstream>

namespace cmeshpart {

std::int64_t ForestSummary::num_leaves() const {
  return std::accumulate(leaf_counts.begin(), leaf_counts.end(), std::int64_t{0});
}

LeafCuts equal_leaf_cuts(std::int64_t num_leaves, int P) {
  if (P < 1) throw RangeError("need at least one rank");
  if (num_leaves < 0) throw RangeError("negative leaf count");
  LeafCuts cuts(P + 1);
  for (int p = 0; p <= P; ++p) {
    cuts[p] = static_cast<std::int64_t>(static_cast<__int128>(num_leaves) * p / P);
  }
  return cuts;
}

LeafCuts weighted_leaf_cuts(const std::vector<double>& weights, int P) {
  if (P < 1) throw RangeError("need at least one rank");
  const auto N = static_cast<std::int64_t>(weights.size());
  std::vector<double> prefix(weights.size() + 1, 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0)) throw RangeError("leaf weights must be positive");
    prefix[i + 1] = prefix[i] + weights[i];
  }
  const double W = prefix.back();
  LeafCuts cuts(P + 1, 0);
  std::int64_t j = 0;
  for (int p = 0; p < P - 1; ++p) {
    const double target = W * (p + 1) / P;
    while (j < N && prefix[j] < target) ++j;
    cuts[p + 1] = j;
  }
  cuts[P] = N;
  return cuts;
}

OffsetArray partition_from_cuts(const ForestSummary& forest, const LeafCuts& cuts) {
  const GlobalIndex K = forest.num_trees();
  const std::int64_t N = forest.num_leaves();
  if (cuts.size() < 2 || cuts.front() != 0 || cuts.back() != N ||
      !std::is_sorted(cuts.begin(), cuts.end())) {
    throw PartitionError("leaf cuts must be nondecreasing from 0 to N");
  }
  // first leaf position of every tree
  std::vector<std::int64_t> tree_start(K + 1, 0);
  for (GlobalIndex k = 0; k < K; ++k) {
    if (forest.leaf_counts[k] < 1) throw PartitionError("every tree needs at least one leaf");
    tree_start[k + 1] = tree_start[k] + forest.leaf_counts[k];
  }
  auto tree_of_leaf = [&](std::int64_t leaf) {
    auto it = std::upper_bound(tree_start.begin(), tree_start.end(), leaf);
    return static_cast<GlobalIndex>(it - tree_start.begin()) - 1;
  };

  const int P = static_cast<int>(cuts.size()) - 1;
  PartitionView view;
  view.num_trees = K;
  view.ranks.resize(P);
  GlobalIndex prev_last = -1;
  for (int p = 0; p < P; ++p) {
    auto& r = view.ranks[p];
    if (cuts[p] == cuts[p + 1]) {
      r = {prev_last + 1, prev_last, false};
      continue;
    }
    r.first = tree_of_leaf(cuts[p]);
    r.last = tree_of_leaf(cuts[p + 1] - 1);
    // Leaves are contiguous, so a first leaf inside a tree means the previous
    // nonempty rank holds the rest of the front of that tree.
    r.first_shared = cuts[p] != tree_start[r.first];
    prev_last = r.last;
  }
  return encode_offsets(view);
}

OffsetArray partition_from_forest(const ForestSummary& forest, int P) {
  if (forest.weighted()) {
    if (static_cast<std::int64_t>(forest.weights.size()) != forest.num_leaves()) {
      throw PartitionError("weight count differs from leaf count");
    }
    return partition_from_cuts(forest, weighted_leaf_cuts(forest.weights, P));
  }
  return partition_from_cuts(forest, equal_leaf_cuts(forest.num_leaves(), P));
}

namespace {

std::int64_t checked_pow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::int64_t>::max() / base) {
      throw RangeError("leaf count overflows 64 bits");
    }
    r *= base;
  }
  return r;
}

}  // namespace

ForestSummary synthetic_band_forest(GlobalIndex K, int base_level,
                                    const std::set<GlobalIndex>& refined_trees, int dim) {
  if (base_level < 0) throw RangeError("negative base level");
  if (dim != 2 && dim != 3) throw RangeError("dimension must be 2 or 3");
  if (K < 0) throw RangeError("negative tree count");
  const std::int64_t c = dim == 2 ? 4 : 8;
  const std::int64_t coarse = checked_pow(c, base_level);
  const std::int64_t fine = checked_pow(c, base_level + 1);
  if (K > 0 && fine > std::numeric_limits<std::int64_t>::max() / K) {
    throw RangeError("total leaf count overflows 64 bits");
  }
  ForestSummary f;
  f.leaf_counts.resize(static_cast<std::size_t>(K));
  for (GlobalIndex k = 0; k < K; ++k) f.leaf_counts[k] = refined_trees.contains(k) ? fine : coarse;
  return f;
}

WitnessForest witness_forest(const OffsetArray& offsets) {
  if (auto rep = is_valid(offsets); !rep) {
    throw PartitionError("invalid partition: " + rep.diagnostics.front());
  }
  const GlobalIndex K = offsets.num_trees();
  const int P = offsets.world_size();
  std::vector<std::vector<Rank>> owners(static_cast<std::size_t>(K));
  for (Rank p = 0; p < P; ++p) {
    for (GlobalIndex k = offsets.first_tree(p); k <= offsets.last_tree(p); ++k) {
      owners[k].push_back(p);
    }
  }
  WitnessForest w;
  w.forest.leaf_counts.resize(static_cast<std::size_t>(K));
  // leaves[k][i]: leaves of tree k given to its i-th owner
  std::vector<std::vector<std::int64_t>> share(static_cast<std::size_t>(K));
  for (GlobalIndex k = 0; k < K; ++k) {
    const auto m = static_cast<std::int64_t>(owners[k].size());
    std::int64_t leaves = 1;
    if (m > 1) {
      while (leaves <= m) leaves *= 4;
    }
    w.forest.leaf_counts[k] = leaves;
    share[k].assign(owners[k].size(), 1);
    share[k].back() = leaves - (m - 1);
  }
  std::vector<std::int64_t> owned(P, 0);
  for (GlobalIndex k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < owners[k].size(); ++i) owned[owners[k][i]] += share[k][i];
  }
  w.cuts.assign(P + 1, 0);
  for (Rank p = 0; p < P; ++p) w.cuts[p + 1] = w.cuts[p] + owned[p];
  return w;
}

std::string to_string(const ForestSummary& forest) {
  std::ostringstream os;
  os << "forest K=" << forest.num_trees() << " :";
  for (auto n : forest.leaf_counts) os << ' ' << n;
  return os.str();
}

ForestSummary parse_forest(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string magic, k_tok, colon;
  if (!(in >> magic >> k_tok >> colon) || magic != "forest" || !k_tok.starts_with("K=") ||
      colon != ":") {
    throw ParseError("expected 'forest K=<K> : N_0 N_1 ...'");
  }
  auto num = [](std::string_view s) {
    std::int64_t v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ParseError("bad number '" + std::string(s) + "'");
    }
    return v;
  };
  const std::int64_t K = num(std::string_view(k_tok).substr(2));
  ForestSummary f;
  std::string tok;
  while (in >> tok) {
    const auto n = num(tok);
    if (n < 1) throw ParseError("leaf counts must be positive");
    f.leaf_counts.push_back(n);
  }
  if (f.num_trees() != K) throw ParseError("forest line has a wrong number of trees");
  return f;
}

}  // namespace cmeshpart
