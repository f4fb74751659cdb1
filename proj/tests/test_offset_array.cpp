#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "cmeshpart/forest.hpp"
#include "cmeshpart/meshgen.hpp"
#include "cmeshpart/offset_array.hpp"

using namespace cmeshpart;

namespace {

OffsetArray O(std::vector<GlobalIndex> e) { return OffsetArray::from_entries(std::move(e)); }

// Validity by brute force over explicit tree sets, independent of the
// range arithmetic used by is_valid.
bool brute_force_valid(const std::vector<GlobalIndex>& e) {
  const int P = static_cast<int>(e.size()) - 1;
  const GlobalIndex K = e.back();
  std::vector<std::set<GlobalIndex>> f(P);
  std::vector<GlobalIndex> start(P);
  for (int p = 0; p < P; ++p) {
    start[p] = e[p] >= 0 ? e[p] : -e[p] - 1;
    const GlobalIndex end = (e[p + 1] >= 0 ? e[p + 1] : -e[p + 1]) - 1;
    if (end < start[p] - 1) return false;
    for (GlobalIndex k = start[p]; k <= end; ++k) {
      if (k < 0 || k >= K) return false;
      f[p].insert(k);
    }
  }
  std::set<GlobalIndex> all;
  for (const auto& s : f) all.insert(s.begin(), s.end());
  if (static_cast<GlobalIndex>(all.size()) != K) return false;
  for (int p = 0; p < P; ++p) {
    for (int q = p + 1; q < P; ++q) {
      if (f[p].empty() || f[q].empty()) continue;
      if (*f[p].rbegin() > *f[q].begin()) return false;
      if (*f[p].rbegin() == *f[q].begin()) {
        const GlobalIndex k = *f[q].begin();
        for (int r = p + 1; r < q; ++r) {
          for (GlobalIndex x : f[r]) {
            if (x != k) return false;
          }
        }
      }
    }
  }
  // Encoding conventions.
  GlobalIndex prev_last = -1;
  bool have_prev = false;
  for (int p = 0; p < P; ++p) {
    if (f[p].empty()) {
      if (e[p] != prev_last + 1) return false;
      continue;
    }
    const bool shared = have_prev && prev_last == *f[p].begin();
    if (shared != (e[p] < 0)) return false;
    have_prev = true;
    prev_last = *f[p].rbegin();
  }
  return true;
}

}  // namespace

TEST(OffsetArray, RangeFormulas) {
  const auto a = O({0, -2, 3, 5});
  EXPECT_EQ(a.first_tree(1), 1);
  EXPECT_EQ(a.last_tree(1), 2);
  EXPECT_EQ(a.num_local_trees(1), 2);
  EXPECT_TRUE(a.first_shared(1));
  EXPECT_EQ(a.last_tree(0), 1);

  const auto b = O({0, -3, -4, 5});
  EXPECT_EQ(b.first_tree(2), 3);
  EXPECT_EQ(b.last_tree(2), 4);
  EXPECT_EQ(b.num_local_trees(1), 2);

  const auto c = O({0, 1, 3, 3});
  EXPECT_EQ(c.first_tree(2), 3);
  EXPECT_EQ(c.last_tree(2), 2);
  EXPECT_EQ(c.num_local_trees(2), 0);
  EXPECT_TRUE(c.empty(2));

  // leading empty ranks
  const auto d = O({0, 0, 0, 2});
  EXPECT_EQ(d.first_tree(0), 0);
  EXPECT_EQ(d.last_tree(0), -1);
  EXPECT_EQ(d.num_local_trees(2), 2);
  EXPECT_THROW(d.first_tree(3), RangeError);
  EXPECT_THROW(d.last_tree(-1), RangeError);
}

TEST(OffsetArray, StructuralChecks) {
  EXPECT_THROW(O({0}), PartitionError);
  EXPECT_THROW(O({1, 2}), PartitionError);
  EXPECT_THROW(O({0, -3}), PartitionError);
}

TEST(IsValid, Examples) {
  EXPECT_TRUE(is_valid(O({0, -2, 3, 5})).valid());
  EXPECT_TRUE(is_valid(O({0, -3, -4, 5})).valid());
  EXPECT_TRUE(is_valid(O({0, 1, 3, 3})).valid());
  EXPECT_TRUE(is_valid(O({0, -1, -2, 2})).valid());
  // empty rank between two sharers of tree 1
  EXPECT_TRUE(is_valid(O({0, 2, -2, 5})).valid());

  // The flag of an empty rank also shifts the end of the rank before it,
  // so the start convention breaks as well.
  const auto flagged_empty = is_valid(O({0, -2, 1, 3}));
  ASSERT_FALSE(flagged_empty.valid());
  EXPECT_TRUE(std::any_of(flagged_empty.diagnostics.begin(), flagged_empty.diagnostics.end(),
                          [](const std::string& d) {
                            return d.find("empty rank flagged shared") != std::string::npos;
                          }));

  const auto gap = is_valid(PartitionView{4, {{0, 0, false}, {2, 3, false}}});
  ASSERT_FALSE(gap.valid());
  EXPECT_NE(gap.diagnostics.front().find("not covered"), std::string::npos);

  const auto decreasing = is_valid(O({0, 3, 1, 5}));
  ASSERT_FALSE(decreasing.valid());

  const auto unflagged = is_valid(PartitionView{3, {{0, 1, false}, {1, 2, false}}});
  ASSERT_FALSE(unflagged.valid());
  EXPECT_NE(unflagged.diagnostics.front().find("not flagged"), std::string::npos);
}

TEST(Encode, Examples) {
  EXPECT_EQ(encode_offsets({5, {{0, 1, false}, {1, 2, true}, {3, 4, false}}}),
            O({0, -2, 3, 5}));
  EXPECT_EQ(encode_offsets({5, {{0, 2, false}, {2, 3, true}, {3, 4, true}}}),
            O({0, -3, -4, 5}));
  EXPECT_EQ(encode_offsets({2, {{0, 0, false}, {0, 1, true}, {1, 1, true}}}),
            O({0, -1, -2, 2}));
  EXPECT_THROW(encode_offsets({2, {{0, 0, false}, {2, 1, true}}}), PartitionError);
}

TEST(Encode, DecodeInverts) {
  const auto o = O({0, 2, -2, 5});
  const auto v = decode_offsets(o);
  EXPECT_EQ(v.ranks[1], (RankRange{2, 1, false}));
  EXPECT_EQ(v.ranks[2], (RankRange{1, 4, true}));
  EXPECT_EQ(encode_offsets(v), o);
}

TEST(OffsetText, RoundTripAndErrors) {
  const auto o = O({0, -2, 3, 5});
  EXPECT_EQ(to_string(o), "offsets P=3 K=5 : 0 -2 3 5");
  EXPECT_EQ(parse_offsets(to_string(o)), o);
  EXPECT_THROW(parse_offsets("offsets P=3 K=5 : 0 -2 3"), ParseError);
  EXPECT_THROW(parse_offsets("offsets P=1 K=4 : 0 5"), ParseError);
  EXPECT_THROW(parse_offsets("offset P=1 K=5 : 0 5"), ParseError);
  EXPECT_THROW(parse_offsets("offsets P=1 K=5 : 0 5x"), ParseError);
}

TEST(SharedCount, CountsTreesNotFlags) {
  EXPECT_EQ(shared_tree_count(O({0, -3, -4, 5})), 2);
  EXPECT_EQ(shared_tree_count(O({0, -1, -1, 1})), 1);
  EXPECT_EQ(shared_tree_count(O({0, 2, 5})), 0);
}

// Every random valid partition survives encode/decode, and the per-rank
// counts add up to K once each shared tree is counted once.
TEST(OffsetProperties, RoundTripAndCounting) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const GlobalIndex K = static_cast<GlobalIndex>(rng() % 40);
    const int P = 1 + static_cast<int>(rng() % 16);
    const auto o = random_partition(rng, K, P);
    ASSERT_TRUE(is_valid(o).valid()) << to_string(o);
    ASSERT_EQ(encode_offsets(decode_offsets(o)), o);
    GlobalIndex sum = 0, flags = 0;
    for (Rank p = 0; p < P; ++p) {
      sum += std::max<GlobalIndex>(o.num_local_trees(p), 0);
      if (!o.empty(p) && o.first_shared(p)) ++flags;
    }
    EXPECT_EQ(sum - flags, K) << to_string(o);
  }
}

// is_valid agrees with the brute-force set check on single-entry mutations
// of valid arrays; every accepted array is induced by some forest.
TEST(OffsetProperties, MutationsAgreeWithBruteForce) {
  std::mt19937_64 rng(99);
  int rejected = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const GlobalIndex K = 1 + static_cast<GlobalIndex>(rng() % 20);
    const int P = 1 + static_cast<int>(rng() % 8);
    const auto base = random_partition(rng, K, P);
    std::vector<GlobalIndex> e(base.entries().begin(), base.entries().end());
    const int idx = 1 + static_cast<int>(rng() % P);
    switch (rng() % 3) {
      case 0: e[idx] += 1; break;
      case 1: e[idx] -= 1; break;
      default: e[idx] = -e[idx] - 1; break;
    }
    if (idx == P && e[idx] < 0) continue;  // structurally rejected
    const auto o = O(e);
    const bool valid = is_valid(o).valid();
    ASSERT_EQ(valid, brute_force_valid(e)) << to_string(o);
    if (valid) {
      const auto w = witness_forest(o);
      ASSERT_EQ(partition_from_cuts(w.forest, w.cuts), o) << to_string(o);
    } else {
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 300);
}
