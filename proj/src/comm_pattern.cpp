#include "cmeshpart/comm_pattern.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cmeshpart {

namespace {

// Smallest rank q with K_q >= k. K_q = |O[q+1]| - 1 is nondecreasing in q,
// including empty ranks.
Rank first_rank_ending_at_or_after(const OffsetArray& o, GlobalIndex k) {
  Rank lo = 0, hi = o.world_size();
  while (lo < hi) {
    const Rank mid = lo + (hi - lo) / 2;
    if (o.last_tree(mid) >= k) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

// Monotone start key: k_q for nonempty ranks, K_q for empty ones. Empty
// ranks report k_q = K_prev + 1, which can exceed the start of a following
// rank that shares K_prev; K_q = K_prev keeps the sequence sorted.
GlobalIndex start_key(const OffsetArray& o, Rank q) {
  return o.empty(q) ? o.last_tree(q) : o.first_tree(q);
}

// Largest rank q with start_key(q) <= k, or -1.
Rank last_rank_starting_at_or_before(const OffsetArray& o, GlobalIndex k) {
  Rank lo = 0, hi = o.world_size();
  while (lo < hi) {
    const Rank mid = lo + (hi - lo) / 2;
    if (start_key(o, mid) <= k) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo - 1;
}

void check_compatible(const OffsetArray& a, const OffsetArray& b) {
  if (a.world_size() != b.world_size() || a.num_trees() != b.num_trees()) {
    throw PartitionError("old and new partition differ in P or K");
  }
}

bool overlaps(const OffsetArray& a, Rank p, const OffsetArray& b, Rank q) {
  return !a.empty(p) && !b.empty(q) && std::max(a.first_tree(p), b.first_tree(q)) <=
                                           std::min(a.last_tree(p), b.last_tree(q));
}

struct SendBounds {
  GlobalIndex from_first, from_last;  // sendable old trees of the sender
  GlobalIndex to_first, to_last;      // new trees of the receiver not kept by itself
};

// Quantities of the constant-time send test for from != to.
SendBounds send_bounds(const OffsetArray& o, const OffsetArray& n, Rank from, Rank to) {
  SendBounds b{};
  b.from_first = o.first_tree(from) + (o.first_shared(from) ? 1 : 0);
  b.from_last = o.last_tree(from);
  if (!o.empty(to) && o.contains(to, b.from_last)) --b.from_last;
  b.to_first = n.first_tree(to);
  b.to_last = n.last_tree(to);
  if (!n.empty(to) && !o.empty(to) && o.contains(to, b.to_first)) ++b.to_first;
  return b;
}

}  // namespace

Rank min_owner(const OffsetArray& offsets, GlobalIndex k) {
  if (k < 0 || k >= offsets.num_trees()) {
    throw RangeError("tree " + std::to_string(k) + " out of range");
  }
  return first_rank_ending_at_or_after(offsets, k);
}

Rank sender_of_tree(const OffsetArray& old_offsets, const OffsetArray& new_offsets,
                    GlobalIndex k, Rank p) {
  check_compatible(old_offsets, new_offsets);
  if (!new_offsets.contains(p, k)) {
    throw std::invalid_argument("tree " + std::to_string(k) + " is not a new local tree of rank " +
                                std::to_string(p));
  }
  if (old_offsets.contains(p, k)) return p;
  return min_owner(old_offsets, k);
}

bool sends_to(const OffsetArray& old_offsets, const OffsetArray& new_offsets, Rank from,
              Rank to) {
  if (from == to) return overlaps(old_offsets, from, new_offsets, to);
  if (old_offsets.empty(from)) return false;
  const auto b = send_bounds(old_offsets, new_offsets, from, to);
  return b.from_first <= b.from_last && b.from_first <= b.to_last &&
         b.to_first <= b.from_last && b.to_first <= b.to_last;
}

std::optional<TreeRange> send_range(const OffsetArray& old_offsets,
                                    const OffsetArray& new_offsets, Rank from, Rank to) {
  if (!sends_to(old_offsets, new_offsets, from, to)) return std::nullopt;
  if (from == to) {
    return TreeRange{std::max(old_offsets.first_tree(from), new_offsets.first_tree(to)),
                     std::min(old_offsets.last_tree(from), new_offsets.last_tree(to))};
  }
  const auto b = send_bounds(old_offsets, new_offsets, from, to);
  return TreeRange{std::max(b.from_first, b.to_first), std::min(b.from_last, b.to_last)};
}

std::vector<Rank> compute_S(const OffsetArray& old_offsets, const OffsetArray& new_offsets,
                            Rank p) {
  check_compatible(old_offsets, new_offsets);
  const auto& o = old_offsets;
  const auto& n = new_offsets;

  // The three circumstances under which S_p is empty. Keeping a tree puts p
  // into its own S_p, so they only apply when p keeps nothing.
  if (o.empty(p)) return {};
  const GlobalIndex first = o.first_tree(p);
  const GlobalIndex last = o.last_tree(p);
  const bool keeps_any = overlaps(o, p, n, p);
  const bool first_lost = o.first_shared(p) && !n.contains(p, first);
  if (!keeps_any && first_lost && first == last) return {};
  if (!keeps_any && first_lost && last == first + 1) {
    // Only the last tree is left; it goes nowhere if every new holder of it
    // already holds it in the old partition.
    bool someone_needs_it = false;
    for (Rank q = min_owner(n, last); q < n.world_size() && start_key(n, q) <= last; ++q) {
      if (n.contains(q, last) && !o.contains(q, last)) {
        someone_needs_it = true;
        break;
      }
    }
    if (!someone_needs_it) return {};
  }

  const GlobalIndex sendable_first = first + (o.first_shared(p) ? 1 : 0);

  Rank s_first = n.world_size();
  Rank s_last = -1;
  if (sendable_first <= last) {
    s_first = first_rank_ending_at_or_after(n, sendable_first);
    s_last = last_rank_starting_at_or_before(n, last);
  }
  if (keeps_any) {
    s_first = std::min(s_first, p);
    s_last = std::max(s_last, p);
  }

  std::vector<Rank> out;
  for (Rank q = s_first; q <= s_last; ++q) {
    if (sends_to(o, n, p, q)) out.push_back(q);
  }
  return out;
}

std::vector<Rank> compute_R(const OffsetArray& old_offsets, const OffsetArray& new_offsets,
                            Rank p) {
  check_compatible(old_offsets, new_offsets);
  if (new_offsets.empty(p)) return {};
  const Rank a = sender_of_tree(old_offsets, new_offsets, new_offsets.first_tree(p), p);
  const Rank b = sender_of_tree(old_offsets, new_offsets, new_offsets.last_tree(p), p);
  const Rank r_first = std::min(a, b);
  const Rank r_last = std::max(a, b);
  std::vector<Rank> out;
  for (Rank q = r_first; q <= r_last; ++q) {
    if (sends_to(old_offsets, new_offsets, q, p)) out.push_back(q);
  }
  return out;
}

CommPattern compute_pattern(const OffsetArray& old_offsets, const OffsetArray& new_offsets,
                            Rank p) {
  CommPattern c;
  c.rank = p;
  c.senders_to = compute_S(old_offsets, new_offsets, p);
  c.receive_from = compute_R(old_offsets, new_offsets, p);
  c.send_ranges.reserve(c.senders_to.size());
  for (Rank q : c.senders_to) c.send_ranges.push_back(*send_range(old_offsets, new_offsets, p, q));
  return c;
}

}  // namespace cmeshpart
