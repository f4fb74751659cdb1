#include "cmeshpart/offset_array.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

namespace cmeshpart {

OffsetArray OffsetArray::from_entries(std::vector<GlobalIndex> entries) {
  if (entries.size() < 2) throw PartitionError("offset array needs at least two entries");
  if (entries.front() != 0) throw PartitionError("offset array must start with 0");
  if (entries.back() < 0) throw PartitionError("last offset entry (tree count) is negative");
  return OffsetArray(std::move(entries));
}

void OffsetArray::check_rank(Rank p) const {
  if (p < 0 || p >= world_size()) {
    throw RangeError("rank " + std::to_string(p) + " out of range [0, " +
                     std::to_string(world_size()) + ")");
  }
}

GlobalIndex OffsetArray::first_tree(Rank p) const {
  check_rank(p);
  const GlobalIndex o = entries_[p];
  return o >= 0 ? o : std::abs(o + 1);
}

GlobalIndex OffsetArray::last_tree(Rank p) const {
  check_rank(p);
  return std::abs(entries_[p + 1]) - 1;
}

LocalIndex OffsetArray::num_local_trees(Rank p) const {
  return static_cast<LocalIndex>(std::abs(entries_[p + 1]) - first_tree(p));
}

bool OffsetArray::first_shared(Rank p) const {
  check_rank(p);
  return entries_[p] < 0;
}

namespace {

void check_ranges(std::span<const RankRange> ranks, GlobalIndex K,
                  std::vector<std::string>& diag) {
  auto rank_str = [](std::size_t p) { return "rank " + std::to_string(p); };

  bool have_prev = false;
  std::size_t prev = 0;
  GlobalIndex prev_last = -1;
  for (std::size_t p = 0; p < ranks.size(); ++p) {
    const auto& r = ranks[p];
    if (r.count() < 0) {
      diag.push_back(rank_str(p) + ": negative tree count (k_p=" + std::to_string(r.first) +
                     ", K_p=" + std::to_string(r.last) + ")");
      continue;
    }
    if (r.empty()) {
      if (r.first != prev_last + 1) {
        diag.push_back(rank_str(p) + ": empty rank start " + std::to_string(r.first) +
                       " differs from " + std::to_string(prev_last + 1));
      }
      if (r.first_shared) diag.push_back(rank_str(p) + ": empty rank flagged shared");
      continue;
    }
    if (r.first < 0 || r.last >= K) {
      diag.push_back(rank_str(p) + ": trees [" + std::to_string(r.first) + ", " +
                     std::to_string(r.last) + "] outside [0, " + std::to_string(K) + ")");
    }
    if (have_prev && r.first < prev_last) {
      diag.push_back("monotonicity: K_" + std::to_string(prev) + "=" +
                     std::to_string(prev_last) + " > k_" + std::to_string(p) + "=" +
                     std::to_string(r.first));
    } else if (r.first_shared) {
      if (!have_prev) {
        diag.push_back(rank_str(p) + ": flagged shared but no smaller rank has trees");
      } else if (prev_last != r.first) {
        diag.push_back(rank_str(p) + ": flagged shared but rank " + std::to_string(prev) +
                       " ends at " + std::to_string(prev_last));
      }
    } else if (have_prev && r.first == prev_last) {
      diag.push_back(rank_str(p) + ": shares tree " + std::to_string(r.first) + " with rank " +
                     std::to_string(prev) + " but is not flagged");
    } else if (r.first != prev_last + 1) {
      diag.push_back(rank_str(p) + ": trees " + std::to_string(prev_last + 1) + ".." +
                     std::to_string(r.first - 1) + " are not covered");
    }
    have_prev = true;
    prev = p;
    prev_last = r.last;
  }
  if (prev_last != K - 1) {
    diag.push_back("trees " + std::to_string(prev_last + 1) + ".." + std::to_string(K - 1) +
                   " are not covered");
  }
  if (!diag.empty()) return;

  // Redundant checks: pairs share at most one tree, and ranks between two
  // sharers of k hold exactly {k} or nothing.
  for (std::size_t p = 0; p < ranks.size(); ++p) {
    if (ranks[p].empty()) continue;
    for (std::size_t q = p + 1; q < ranks.size(); ++q) {
      if (ranks[q].empty()) continue;
      if (ranks[q].first > ranks[p].last) break;
      const GlobalIndex lo = std::max(ranks[p].first, ranks[q].first);
      const GlobalIndex hi = std::min(ranks[p].last, ranks[q].last);
      if (hi - lo + 1 > 1) {
        diag.push_back("ranks " + std::to_string(p) + " and " + std::to_string(q) +
                       " share more than one tree");
        continue;
      }
      for (std::size_t r = p + 1; r < q; ++r) {
        if (!ranks[r].empty() && !(ranks[r].first == lo && ranks[r].last == lo)) {
          diag.push_back("rank " + std::to_string(r) + " lies between sharers of tree " +
                         std::to_string(lo) + " but holds other trees");
        }
      }
    }
  }
}

}  // namespace

ValidityReport is_valid(const PartitionView& view) {
  ValidityReport rep;
  if (view.ranks.empty()) rep.diagnostics.push_back("partition has no ranks");
  if (view.num_trees < 0) rep.diagnostics.push_back("negative tree count");
  if (rep.valid()) check_ranges(view.ranks, view.num_trees, rep.diagnostics);
  return rep;
}

ValidityReport is_valid(const OffsetArray& offsets) {
  return is_valid(decode_offsets(offsets));
}

OffsetArray encode_offsets(const PartitionView& view) {
  if (auto rep = is_valid(view); !rep) {
    throw PartitionError("invalid partition: " + rep.diagnostics.front());
  }
  std::vector<GlobalIndex> e;
  e.reserve(view.ranks.size() + 1);
  for (const auto& r : view.ranks) {
    e.push_back(r.first_shared && !r.empty() ? -r.first - 1 : r.first);
  }
  e.push_back(view.num_trees);
  return OffsetArray::from_entries(std::move(e));
}

PartitionView decode_offsets(const OffsetArray& offsets) {
  PartitionView v;
  v.num_trees = offsets.num_trees();
  v.ranks.reserve(offsets.world_size());
  for (Rank p = 0; p < offsets.world_size(); ++p) v.ranks.push_back(offsets.range(p));
  return v;
}

GlobalIndex shared_tree_count(const OffsetArray& offsets) {
  // Every shared tree is flagged exactly once, on the second smallest rank
  // that holds it; further sharers are flagged again for the same tree.
  GlobalIndex count = 0;
  GlobalIndex last_counted = -1;
  for (Rank p = 0; p < offsets.world_size(); ++p) {
    if (offsets.empty(p) || !offsets.first_shared(p)) continue;
    const GlobalIndex k = offsets.first_tree(p);
    if (k != last_counted) {
      ++count;
      last_counted = k;
    }
  }
  return count;
}

std::string to_string(const OffsetArray& offsets) {
  std::ostringstream os;
  os << "offsets P=" << offsets.world_size() << " K=" << offsets.num_trees() << " :";
  for (auto v : offsets.entries()) os << ' ' << v;
  return os.str();
}

OffsetArray parse_offsets(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string magic, p_tok, k_tok, colon;
  if (!(in >> magic >> p_tok >> k_tok >> colon) || magic != "offsets" ||
      !p_tok.starts_with("P=") || !k_tok.starts_with("K=") || colon != ":") {
    throw ParseError("expected 'offsets P=<P> K=<K> : v0 ... vP'");
  }
  auto num = [](std::string_view s) {
    GlobalIndex v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ParseError("bad number '" + std::string(s) + "'");
    }
    return v;
  };
  const GlobalIndex P = num(std::string_view(p_tok).substr(2));
  const GlobalIndex K = num(std::string_view(k_tok).substr(2));
  std::vector<GlobalIndex> e;
  std::string tok;
  while (in >> tok) e.push_back(num(tok));
  if (P < 1 || static_cast<GlobalIndex>(e.size()) != P + 1) {
    throw ParseError("offset line has " + std::to_string(e.size()) + " entries, expected P+1");
  }
  if (e.back() != K) throw ParseError("last offset entry differs from K");
  try {
    return OffsetArray::from_entries(std::move(e));
  } catch (const PartitionError& err) {
    throw ParseError(err.what());
  }
}

}  // namespace cmeshpart
