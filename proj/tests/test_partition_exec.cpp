#include <gtest/gtest.h>

#include <barrier>
#include <mutex>
#include <random>
#include <thread>

#include "cmeshpart/meshgen.hpp"
#include "cmeshpart/partition_exec.hpp"

using namespace cmeshpart;

namespace {

OffsetArray O(std::vector<GlobalIndex> e) { return OffsetArray::from_entries(std::move(e)); }

std::vector<GlobalIndex> tree_ids(const MessageContents& m) {
  std::vector<GlobalIndex> out;
  for (const auto& t : m.trees) out.push_back(t.id);
  return out;
}

std::vector<GlobalIndex> ghost_ids(const MessageContents& m) {
  std::vector<GlobalIndex> out;
  for (const auto& g : m.ghosts) out.push_back(g.id);
  return out;
}

// Real threads, one per rank, meeting at a barrier between the phases.
class ThreadMailbox : public Mailbox {
 public:
  explicit ThreadMailbox(int P) : boxes_(P), sync_(P) {}
  void send(RankMessage msg) override {
    std::lock_guard lock(mu_);
    boxes_[msg.to].push_back(std::move(msg));
  }
  void barrier() override { sync_.arrive_and_wait(); }
  std::vector<RankMessage> receive(Rank p) override {
    std::lock_guard lock(mu_);
    return boxes_[p];
  }

 private:
  std::mutex mu_;
  std::vector<std::vector<RankMessage>> boxes_;
  std::barrier<> sync_;
};

}  // namespace

TEST(IndexUpdate, Formulas) {
  EXPECT_EQ(new_local_index_of_local(5, 2, 6, 3), 1);
  EXPECT_EQ(new_local_index_of_ghost(40, 38, 5), 2);
  EXPECT_THROW(new_local_index_of_local(5, 0, 6, 3), ConsistencyError);
  EXPECT_THROW(new_local_index_of_ghost(41, 38, 3), ConsistencyError);
}

TEST(IndexUpdate, PhaseOneMarksFutureGhosts) {
  const auto mesh = three_tree_ring();
  const auto c1 = extract_cmesh(mesh, O({0, 1, 3, 3}), 1);
  const auto n = O({0, -1, 2, 3});
  // tree 2 goes to rank 2, where both neighbors become ghosts
  const auto w = update_ids_phase1(c1, 1, n, 2);
  EXPECT_EQ(w.id, 2);
  EXPECT_EQ(w.neighbors, (std::vector<GlobalIndex>{pending_ghost(0), 0, pending_ghost(1), 0}));
  // tree 1 stays on rank 1; tree 0 becomes local there
  const auto v = update_ids_phase1(c1, 0, n, 1);
  EXPECT_EQ(v.neighbors, (std::vector<GlobalIndex>{0, 1, 1, pending_ghost(2)}));
}

TEST(IndexUpdate, PhaseTwoOnThreeQuadRing) {
  const auto mesh = three_tree_ring();
  const auto o = O({0, 1, 3, 3});
  const auto n = O({0, -1, 2, 3});
  const auto c1 = extract_cmesh(mesh, o, 1);
  IncomingCmesh in;
  in.rank = 2;
  in.dim = 2;
  in.offsets = n;
  in.trees.push_back(update_ids_phase1(c1, 1, n, 2));
  in.ghosts.push_back(c1.ghosts[0]);         // tree 0
  in.ghosts.push_back(ghost_of_local(c1, 0));  // tree 1
  const auto c = update_ids_phase2(in);
  ASSERT_EQ(c.num_local(), 1);
  EXPECT_EQ(c.trees[0].tree_to_tree, (std::vector<LocalIndex>{1, 0, 2, 0}));
  EXPECT_EQ(c.resolve(1), 0);
  EXPECT_EQ(c.resolve(2), 1);
  EXPECT_TRUE(check_cmesh(c).empty());

  in.ghosts.pop_back();
  try {
    update_ids_phase2(in);
    FAIL() << "expected a missing ghost";
  } catch (const ConsistencyError& e) {
    EXPECT_NE(std::string(e.what()).find("missing ghost 1"), std::string::npos);
  }
}

TEST(SendPhase, ThreeQuadRingMessages) {
  const auto mesh = three_tree_ring();
  const auto o = O({0, 1, 3, 3});
  const auto n = O({0, -1, 2, 3});
  const auto m0 = send_phase(extract_cmesh(mesh, o, 0), n);
  const auto m1 = send_phase(extract_cmesh(mesh, o, 1), n);
  EXPECT_TRUE(send_phase(extract_cmesh(mesh, o, 2), n).empty());
  ASSERT_EQ(m0.size(), 2u);
  ASSERT_EQ(m1.size(), 2u);

  auto c = read_message(m0[0]);  // self
  EXPECT_EQ(m0[0].to, 0);
  EXPECT_EQ(tree_ids(c), (std::vector<GlobalIndex>{0}));
  EXPECT_EQ(ghost_ids(c), (std::vector<GlobalIndex>{1, 2}));
  c = read_message(m0[1]);
  EXPECT_EQ(m0[1].to, 1);
  EXPECT_EQ(tree_ids(c), (std::vector<GlobalIndex>{0}));
  EXPECT_TRUE(ghost_ids(c).empty());
  c = read_message(m1[0]);
  EXPECT_EQ(tree_ids(c), (std::vector<GlobalIndex>{1}));
  EXPECT_EQ(ghost_ids(c), (std::vector<GlobalIndex>{2}));
  c = read_message(m1[1]);
  EXPECT_EQ(m1[1].to, 2);
  EXPECT_EQ(tree_ids(c), (std::vector<GlobalIndex>{2}));
  EXPECT_EQ(ghost_ids(c), (std::vector<GlobalIndex>{0, 1}));
  EXPECT_EQ(m1[1].header(), "msg v1 from=1 to=2 ntrees=1 nghosts=2");
}

TEST(ReceivePhase, RejectsWrongSenders) {
  const auto mesh = three_tree_ring();
  const auto o = O({0, 1, 3, 3});
  const auto n = O({0, -1, 2, 3});
  const auto c2 = extract_cmesh(mesh, o, 2);
  EXPECT_THROW(receive_phase(c2, n, {}), ConsistencyError);
  auto msgs = send_phase(extract_cmesh(mesh, o, 1), n);
  std::vector<RankMessage> twice{msgs[1], msgs[1]};
  EXPECT_THROW(receive_phase(c2, n, twice), ConsistencyError);
}

TEST(Wire, ByteLayout) {
  WireTree t{7, TreeClass::quad, {0, pending_ghost(3), 7, 7}, {}, {0xaa, 0xbb}};
  for (int f = 0; f < 4; ++f) t.faces.push_back(FaceCode::encode(f % 2, f, 2));
  GhostRecord g{3, TreeClass::triangle, {3, 7, 3}, {}};
  for (int f = 0; f < 3; ++f) g.tree_to_face.push_back(FaceCode::encode(0, f, 2));
  const auto m = make_message(0, 1, std::span(&t, 1), std::span(&g, 1));
  // tree: 8 + 1 + 4 * (8 + 4) + 4 + 2, ghost: 8 + 1 + 3 * (8 + 4)
  ASSERT_EQ(m.byte_length(), 63u + 45u);
  EXPECT_EQ(m.ntrees, 1u);
  EXPECT_EQ(m.nghosts, 1u);
  const std::vector<std::uint8_t> head(m.payload.begin(), m.payload.begin() + 9);
  EXPECT_EQ(head, (std::vector<std::uint8_t>{7, 0, 0, 0, 0, 0, 0, 0,
                                             static_cast<std::uint8_t>(TreeClass::quad)}));
  // second face neighbor: -4 as little-endian i64
  EXPECT_EQ(m.payload[9 + 12], 0xfc);
  EXPECT_EQ(m.payload[9 + 12 + 7], 0xff);
  EXPECT_EQ(m.payload[61], 0xaa);
  EXPECT_EQ(m.payload[62], 0xbb);

  const auto back = read_message(m);
  ASSERT_EQ(back.trees.size(), 1u);
  EXPECT_EQ(back.trees[0], t);
  EXPECT_EQ(back.ghosts[0], g);
}

TEST(Wire, MalformedPayloads) {
  const auto mesh = three_tree_ring();
  auto msgs = send_phase(extract_cmesh(mesh, O({0, 1, 3, 3}), 1), O({0, -1, 2, 3}));
  auto m = msgs[1];
  m.payload.pop_back();
  EXPECT_THROW(read_message(m), ParseError);
  m = msgs[1];
  m.payload.push_back(0);
  EXPECT_THROW(read_message(m), ParseError);
  m = msgs[1];
  m.payload[8] = 200;  // tree class byte
  EXPECT_THROW(read_message(m), ParseError);
  EXPECT_THROW(unframe_message("no header"), ParseError);
  EXPECT_THROW(unframe_message("msg v1 from=a to=1 ntrees=0 nghosts=0\n"), ParseError);
}

TEST(WireProperties, RandomMessagesRoundTrip) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const auto mesh = random_mesh(rng, 1 + static_cast<GlobalIndex>(rng() % 20), 2 + trial % 2);
    std::vector<WireTree> trees;
    std::vector<GhostRecord> ghosts;
    for (GlobalIndex k = 0; k < mesh.num_trees(); ++k) {
      const auto& gt = mesh.trees[k];
      if (rng() % 2) {
        WireTree w{k, gt.eclass, gt.neighbors, gt.faces, gt.data};
        for (auto& n : w.neighbors) {
          if (rng() % 2) n = pending_ghost(n);
        }
        trees.push_back(std::move(w));
      } else {
        ghosts.push_back({k, gt.eclass, gt.neighbors, gt.faces});
      }
    }
    const auto m = make_message(3, 5, trees, ghosts);
    const auto back = read_message(unframe_message(frame_message(m)));
    ASSERT_EQ(back.trees, trees);
    ASSERT_EQ(back.ghosts, ghosts);
    const auto u = unframe_message(frame_message(m));
    EXPECT_EQ(u.header(), m.header());
    EXPECT_EQ(u.payload, m.payload);
  }
}

// partition_cmesh with one thread per rank and a real barrier.
TEST(PartitionCmesh, ThreadedRanksMatchExtraction) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const GlobalIndex K = 1 + static_cast<GlobalIndex>(rng() % 30);
    const int P = 1 + static_cast<int>(rng() % 6);
    const auto mesh = random_mesh(rng, K, 2 + trial % 2);
    const auto o = random_partition(rng, K, P);
    const auto n = random_partition(rng, K, P);
    ThreadMailbox box(P);
    std::vector<Cmesh> out(P);
    std::vector<std::string> errors(P);
    {
      std::vector<std::jthread> threads;
      for (Rank p = 0; p < P; ++p) {
        threads.emplace_back([&, p] {
          try {
            out[p] = partition_cmesh(extract_cmesh(mesh, o, p), n, box);
          } catch (const std::exception& e) {
            errors[p] = e.what();
          }
        });
      }
    }
    for (Rank p = 0; p < P; ++p) {
      ASSERT_EQ(errors[p], "");
      const auto ref = extract_cmesh(mesh, n, p);
      ASSERT_EQ(out[p].trees.size(), ref.trees.size());
      for (LocalIndex l = 0; l < ref.num_local(); ++l) {
        ASSERT_EQ(global_neighbors(out[p], l), global_neighbors(ref, l));
        ASSERT_EQ(out[p].trees[l].tree_data, ref.trees[l].tree_data);
      }
      std::vector<GlobalIndex> got;
      for (const auto& g : out[p].ghosts) got.push_back(g.id);
      std::sort(got.begin(), got.end());
      std::vector<GlobalIndex> want;
      for (const auto& g : ref.ghosts) want.push_back(g.id);
      ASSERT_EQ(got, want);
    }
  }
}

TEST(PartitionCmesh, RejectsBadTables) {
  const auto mesh = quad_strip(4);
  const auto c = extract_cmesh(mesh, O({0, 2, 4}), 0);
  ThreadMailbox box(1);
  EXPECT_THROW(partition_cmesh(c, O({0, 3}), box), PartitionError);
  EXPECT_THROW(partition_cmesh(c, O({0, 5, 4}), box), PartitionError);
  EXPECT_THROW(partition_cmesh(c, O({0, 1, 3}), box), PartitionError);
}
