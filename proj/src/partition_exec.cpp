#include "cmeshpart/partition_exec.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>
#include <unordered_set>

#include "cmeshpart/ghost_rules.hpp"

namespace cmeshpart {

namespace {

static_assert(std::endian::native == std::endian::little,
              "wire format writer assumes a little-endian host");

class ByteWriter {
 public:
  template <class T>
  void put(T v) {
    const auto at = buf_.size();
    buf_.resize(at + sizeof(T));
    std::memcpy(buf_.data() + at, &v, sizeof(T));
  }
  void put_bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : buf_(b) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  TreeData get_bytes(std::size_t n) {
    need(n);
    TreeData out(buf_.begin() + pos_, buf_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw ParseError("truncated message payload");
  }
  std::span<const std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

TreeClass get_class(ByteReader& r) {
  const auto c = r.get<std::uint8_t>();
  if (c >= kNumTreeClasses) throw ParseError("bad tree class byte in message");
  return static_cast<TreeClass>(c);
}

}  // namespace

std::string RankMessage::header() const {
  std::ostringstream os;
  os << "msg v1 from=" << from << " to=" << to << " ntrees=" << ntrees << " nghosts=" << nghosts;
  return os.str();
}

RankMessage make_message(Rank from, Rank to, std::span<const WireTree> trees,
                         std::span<const GhostRecord> ghosts) {
  ByteWriter w;
  for (const auto& t : trees) {
    w.put<std::int64_t>(t.id);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.eclass));
    for (std::size_t f = 0; f < t.neighbors.size(); ++f) {
      w.put<std::int64_t>(t.neighbors[f]);
      w.put<std::int32_t>(t.faces[f].value());
    }
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.data.size()));
    w.put_bytes(t.data);
  }
  for (const auto& g : ghosts) {
    w.put<std::int64_t>(g.id);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(g.eclass));
    for (std::size_t f = 0; f < g.tree_to_tree.size(); ++f) {
      w.put<std::int64_t>(g.tree_to_tree[f]);
      w.put<std::int32_t>(g.tree_to_face[f].value());
    }
  }
  return {from, to, static_cast<std::uint32_t>(trees.size()),
          static_cast<std::uint32_t>(ghosts.size()), w.take()};
}

MessageContents read_message(const RankMessage& msg) {
  ByteReader r(msg.payload);
  MessageContents out;
  out.trees.reserve(msg.ntrees);
  for (std::uint32_t i = 0; i < msg.ntrees; ++i) {
    WireTree t;
    t.id = r.get<std::int64_t>();
    t.eclass = get_class(r);
    const int nf = num_faces(t.eclass);
    t.neighbors.reserve(nf);
    t.faces.reserve(nf);
    for (int f = 0; f < nf; ++f) {
      t.neighbors.push_back(r.get<std::int64_t>());
      t.faces.push_back(FaceCode::from_raw(r.get<std::int32_t>()));
    }
    t.data = r.get_bytes(r.get<std::uint32_t>());
    out.trees.push_back(std::move(t));
  }
  out.ghosts.reserve(msg.nghosts);
  for (std::uint32_t i = 0; i < msg.nghosts; ++i) {
    GhostRecord g;
    g.id = r.get<std::int64_t>();
    g.eclass = get_class(r);
    const int nf = num_faces(g.eclass);
    for (int f = 0; f < nf; ++f) {
      g.tree_to_tree.push_back(r.get<std::int64_t>());
      g.tree_to_face.push_back(FaceCode::from_raw(r.get<std::int32_t>()));
    }
    out.ghosts.push_back(std::move(g));
  }
  if (!r.done()) throw ParseError("trailing bytes in message payload");
  return out;
}

std::string frame_message(const RankMessage& msg) {
  std::string out = msg.header();
  out.push_back('\n');
  out.append(msg.payload.begin(), msg.payload.end());
  return out;
}

RankMessage unframe_message(std::string_view framed) {
  const auto nl = framed.find('\n');
  if (nl == std::string_view::npos) throw ParseError("message without header line");
  std::istringstream hs{std::string(framed.substr(0, nl))};
  std::string magic, version, from, to, nt, ng;
  if (!(hs >> magic >> version >> from >> to >> nt >> ng) || magic != "msg" || version != "v1" ||
      !from.starts_with("from=") || !to.starts_with("to=") || !nt.starts_with("ntrees=") ||
      !ng.starts_with("nghosts=")) {
    throw ParseError("bad message header");
  }
  RankMessage m;
  try {
    m.from = std::stoi(from.substr(5));
    m.to = std::stoi(to.substr(3));
    m.ntrees = static_cast<std::uint32_t>(std::stoul(nt.substr(7)));
    m.nghosts = static_cast<std::uint32_t>(std::stoul(ng.substr(8)));
  } catch (const std::exception&) {
    throw ParseError("bad number in message header");
  }
  auto body = framed.substr(nl + 1);
  m.payload.assign(body.begin(), body.end());
  return m;
}

LocalIndex new_local_index_of_local(GlobalIndex old_first, LocalIndex old_local,
                                    GlobalIndex new_first, LocalIndex new_count) {
  const GlobalIndex k = old_first + old_local - new_first;
  if (k < 0 || k >= new_count) {
    throw ConsistencyError("tree " + std::to_string(old_first + old_local) +
                           " is outside the destination range");
  }
  return static_cast<LocalIndex>(k);
}

LocalIndex new_local_index_of_ghost(GlobalIndex id, GlobalIndex new_first, LocalIndex new_count) {
  const GlobalIndex k = id - new_first;
  if (k < 0 || k >= new_count) {
    throw ConsistencyError("ghost " + std::to_string(id) + " is outside the destination range");
  }
  return static_cast<LocalIndex>(k);
}

WireTree update_ids_phase1(const Cmesh& c, LocalIndex local, const OffsetArray& new_offsets,
                           Rank dest) {
  const auto& t = c.trees.at(local);
  const GlobalIndex new_first = new_offsets.first_tree(dest);
  const LocalIndex new_count = new_offsets.num_local_trees(dest);
  WireTree w;
  w.id = c.global_id(local);
  w.eclass = t.eclass;
  w.faces = t.tree_to_face;
  w.data = t.tree_data;
  w.neighbors.reserve(t.tree_to_tree.size());
  for (LocalIndex u : t.tree_to_tree) {
    const GlobalIndex id = c.resolve(u);
    if (!new_offsets.contains(dest, id)) {
      w.neighbors.push_back(pending_ghost(id));
    } else if (c.is_local_index(u)) {
      w.neighbors.push_back(new_local_index_of_local(c.first_tree(), u, new_first, new_count));
    } else {
      w.neighbors.push_back(new_local_index_of_ghost(id, new_first, new_count));
    }
  }
  return w;
}

Cmesh update_ids_phase2(IncomingCmesh in) {
  const Rank p = in.rank;
  const GlobalIndex first = in.offsets.first_tree(p);
  const auto n_local = static_cast<LocalIndex>(in.trees.size());
  const std::string where = "rank " + std::to_string(p) + ": ";

  for (LocalIndex j = 0; j < static_cast<LocalIndex>(in.ghosts.size()); ++j) {
    const auto& g = in.ghosts[j];
    for (std::size_t i = 0; i < g.tree_to_tree.size(); ++i) {
      const GlobalIndex n = g.tree_to_tree[i];
      if (!in.offsets.contains(p, n)) continue;
      auto& t = in.trees[n - first];
      const int face = g.tree_to_face[i].neighbor_face(in.dim);
      if (face >= static_cast<int>(t.neighbors.size())) {
        throw ConsistencyError(where + "ghost " + std::to_string(g.id) +
                               " names a face its neighbor does not have");
      }
      auto& slot = t.neighbors[face];
      const GlobalIndex mine = n_local + j;
      if (slot == pending_ghost(g.id)) {
        slot = mine;
      } else if (slot != mine) {
        throw ConsistencyError(where + "tree " + std::to_string(n) + " face " +
                               std::to_string(face) + " does not expect ghost " +
                               std::to_string(g.id));
      }
    }
  }

  Cmesh out;
  out.rank = p;
  out.dim = in.dim;
  out.offsets = std::move(in.offsets);
  out.trees.reserve(in.trees.size());
  for (auto& w : in.trees) {
    LocalTree t;
    t.eclass = w.eclass;
    t.tree_to_face = std::move(w.faces);
    t.tree_data = std::move(w.data);
    t.tree_to_tree.reserve(w.neighbors.size());
    for (std::size_t f = 0; f < w.neighbors.size(); ++f) {
      if (w.neighbors[f] < 0) {
        throw ConsistencyError(where + "missing ghost " +
                               std::to_string(-w.neighbors[f] - 1) + " for tree " +
                               std::to_string(w.id) + " face " + std::to_string(f));
      }
      t.tree_to_tree.push_back(static_cast<LocalIndex>(w.neighbors[f]));
    }
    out.trees.push_back(std::move(t));
  }
  out.ghosts = std::move(in.ghosts);
  return out;
}

std::vector<OutgoingPlan> plan_sends(const Cmesh& c, const OffsetArray& new_offsets) {
  const Rank p = c.rank;
  const auto S = compute_S(c.offsets, new_offsets, p);
  std::vector<OutgoingPlan> plans;
  plans.reserve(S.size());
  for (Rank q : S) {
    OutgoingPlan plan;
    plan.to = q;
    const auto range = send_range(c.offsets, new_offsets, p, q);
    if (!range) throw ConsistencyError("rank " + std::to_string(q) + " in S_p without trees");
    plan.trees = *range;
    if (q == p) {
      plan.ghosts = retained_ghosts(c, new_offsets);
    } else {
      GhostPlan ghosts;
      for (GlobalIndex k = range->first; k <= range->last; ++k) {
        parse_neighbors(c, static_cast<LocalIndex>(k - c.first_tree()), q, *range, ghosts,
                        new_offsets);
      }
      for (auto& [id, g] : ghosts.by_destination[q]) plan.ghosts.push_back(std::move(g));
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<RankMessage> send_phase(const Cmesh& c, const OffsetArray& new_offsets) {
  std::vector<RankMessage> out;
  for (auto& plan : plan_sends(c, new_offsets)) {
    std::vector<WireTree> trees;
    trees.reserve(static_cast<std::size_t>(plan.trees.count()));
    for (GlobalIndex k = plan.trees.first; k <= plan.trees.last; ++k) {
      trees.push_back(
          update_ids_phase1(c, static_cast<LocalIndex>(k - c.first_tree()), new_offsets, plan.to));
    }
    out.push_back(make_message(c.rank, plan.to, trees, plan.ghosts));
  }
  return out;
}

Cmesh receive_phase(const Cmesh& c, const OffsetArray& new_offsets,
                    std::span<const RankMessage> mailbox) {
  const Rank p = c.rank;
  const std::string where = "rank " + std::to_string(p) + ": ";
  std::vector<const RankMessage*> sorted;
  sorted.reserve(mailbox.size());
  for (const auto& m : mailbox) {
    if (m.to != p) throw ConsistencyError(where + "received a message for rank " + std::to_string(m.to));
    sorted.push_back(&m);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const RankMessage* a, const RankMessage* b) { return a->from < b->from; });

  const auto R = compute_R(c.offsets, new_offsets, p);
  std::vector<Rank> senders;
  for (const auto* m : sorted) senders.push_back(m->from);
  if (senders != R) throw ConsistencyError(where + "message senders differ from R_p");

  IncomingCmesh in;
  in.rank = p;
  in.dim = c.dim;
  in.offsets = new_offsets;
  std::unordered_set<GlobalIndex> ghost_ids;
  for (const auto* m : sorted) {
    auto contents = read_message(*m);
    for (auto& t : contents.trees) {
      const GlobalIndex expected = new_offsets.first_tree(p) + static_cast<GlobalIndex>(in.trees.size());
      if (t.id != expected) {
        throw ConsistencyError(where + "received tree " + std::to_string(t.id) + ", expected " +
                               std::to_string(expected));
      }
      in.trees.push_back(std::move(t));
    }
    for (auto& g : contents.ghosts) {
      if (!ghost_ids.insert(g.id).second) {
        throw ConsistencyError(where + "ghost " + std::to_string(g.id) + " received twice");
      }
      in.ghosts.push_back(std::move(g));
    }
  }
  if (static_cast<LocalIndex>(in.trees.size()) !=
      std::max<LocalIndex>(new_offsets.num_local_trees(p), 0)) {
    throw ConsistencyError(where + "received " + std::to_string(in.trees.size()) +
                           " trees, expected " +
                           std::to_string(new_offsets.num_local_trees(p)));
  }
  return update_ids_phase2(std::move(in));
}

Cmesh partition_cmesh(const Cmesh& c, const OffsetArray& new_offsets, Mailbox& mailbox) {
  if (new_offsets.num_trees() != c.offsets.num_trees() ||
      new_offsets.world_size() != c.offsets.world_size()) {
    throw PartitionError("new partition differs from the mesh in K or P");
  }
  if (auto rep = is_valid(new_offsets); !rep) {
    throw PartitionError("invalid new partition: " + rep.diagnostics.front());
  }
  for (auto& m : send_phase(c, new_offsets)) mailbox.send(std::move(m));
  mailbox.barrier();
  const auto inbox = mailbox.receive(c.rank);
  return receive_phase(c, new_offsets, inbox);
}

}  // namespace cmeshpart
