#include "cmeshpart/sim_runtime.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cmeshpart/ghost_rules.hpp"

namespace cmeshpart {

World::World(std::vector<Cmesh> ranks) : ranks_(std::move(ranks)) {
  if (ranks_.empty()) throw std::invalid_argument("a world needs at least one rank");
  for (Rank p = 0; p < size(); ++p) {
    if (ranks_[p].rank != p || ranks_[p].world_size() != size()) {
      throw std::invalid_argument("rank " + std::to_string(p) + " is inconsistent with the world");
    }
  }
}

World World::distribute(const GlobalMesh& mesh, const OffsetArray& offsets) {
  if (auto rep = is_valid(offsets); !rep) {
    throw PartitionError("invalid partition: " + rep.diagnostics.front());
  }
  std::vector<Cmesh> ranks;
  ranks.reserve(offsets.world_size());
  for (Rank p = 0; p < offsets.world_size(); ++p) ranks.push_back(extract_cmesh(mesh, offsets, p));
  return World(std::move(ranks));
}

void World::commit(std::vector<Cmesh> ranks) {
  ranks_ = std::move(ranks);
  ++step_;
}

namespace {

// Runs fn(p) for every p in `order` on a pool of worker threads. Returns
// the failure of the smallest failing rank, if any.
template <class Fn>
std::optional<RankError> for_each_rank(const std::vector<Rank>& order, int threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::optional<RankError> first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      const Rank p = order[i];
      try {
        fn(p);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mutex);
        if (!first_error || p < first_error->rank()) first_error.emplace(p, e.what());
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(order.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  return first_error;
}

void dump_message(const std::string& dir, const RankMessage& m) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) /
                    ("msg_" + std::to_string(m.from) + "_" + std::to_string(m.to) + ".bin");
  std::ofstream out(path, std::ios::binary);
  const auto framed = frame_message(m);
  out.write(framed.data(), static_cast<std::streamsize>(framed.size()));
}

}  // namespace

PartitionStats run_repartition(World& world, const OffsetArray& new_offsets,
                               const RepartitionOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const OffsetArray& old_offsets = world.offsets();
  const int P = world.size();
  if (new_offsets.world_size() != P || new_offsets.num_trees() != old_offsets.num_trees()) {
    throw PartitionError("new partition differs from the world in K or P");
  }
  if (auto rep = is_valid(new_offsets); !rep) {
    throw PartitionError("invalid new partition: " + rep.diagnostics.front());
  }

  std::vector<Rank> order(P);
  std::iota(order.begin(), order.end(), 0);
  if (options.schedule_seed != 0) {
    std::mt19937_64 rng(options.schedule_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  const int threads = options.threads > 0
                          ? options.threads
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  // Sending phase. Each rank writes only its own outbox slot.
  std::vector<std::vector<RankMessage>> outbox(P);
  if (auto err = for_each_rank(order, threads, [&](Rank p) {
        outbox[p] = send_phase(world.rank(p), new_offsets);
      })) {
    throw *err;
  }

  // Barrier: deliver, mailboxes ordered by sender.
  PartitionStats stats;
  stats.num_trees = new_offsets.num_trees();
  stats.shared_tree_count = shared_tree_count(new_offsets);
  stats.per_rank.resize(P);
  std::vector<std::vector<RankMessage>> inbox(P);
  for (Rank p = 0; p < P; ++p) {
    auto& s = stats.per_rank[p];
    s.rank = p;
    s.S_size = static_cast<std::int64_t>(outbox[p].size());
    for (auto& m : outbox[p]) {
      if (m.on_wire()) {
        s.trees_sent += m.ntrees;
        s.ghosts_sent += m.nghosts;
        s.bytes_sent += static_cast<std::int64_t>(m.byte_length());
        ++s.messages_sent;
        if (!options.dump_dir.empty()) dump_message(options.dump_dir, m);
      }
      if (options.record_messages) {
        const auto contents = read_message(m);
        MessageLog log{m.from, m.to, {}, {}};
        for (const auto& t : contents.trees) log.trees.push_back(t.id);
        for (const auto& g : contents.ghosts) log.ghosts.push_back(g.id);
        stats.messages.push_back(std::move(log));
      }
      inbox[m.to].push_back(std::move(m));
    }
  }

  // Receiving phase.
  std::vector<Cmesh> next(P);
  if (auto err = for_each_rank(order, threads, [&](Rank p) {
        next[p] = receive_phase(world.rank(p), new_offsets, inbox[p]);
      })) {
    throw *err;
  }
  world.commit(std::move(next));
  stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

std::int64_t PartitionStats::total_trees_sent() const {
  std::int64_t n = 0;
  for (const auto& s : per_rank) n += s.trees_sent;
  return n;
}

std::int64_t PartitionStats::total_ghosts_sent() const {
  std::int64_t n = 0;
  for (const auto& s : per_rank) n += s.ghosts_sent;
  return n;
}

std::int64_t PartitionStats::total_bytes_sent() const {
  std::int64_t n = 0;
  for (const auto& s : per_rank) n += s.bytes_sent;
  return n;
}

std::int64_t PartitionStats::wire_messages() const {
  std::int64_t n = 0;
  for (const auto& s : per_rank) n += s.messages_sent;
  return n;
}

double PartitionStats::mean_S_size() const {
  if (per_rank.empty()) return 0;
  double n = 0;
  for (const auto& s : per_rank) n += static_cast<double>(s.S_size);
  return n / static_cast<double>(per_rank.size());
}

std::string PartitionStats::to_csv() const {
  std::ostringstream os;
  os << "rank,trees_sent,ghosts_sent,bytes,S_size\n";
  for (const auto& s : per_rank) {
    os << s.rank << ',' << s.trees_sent << ',' << s.ghosts_sent << ',' << s.bytes_sent << ','
       << s.S_size << '\n';
  }
  return os.str();
}

std::string PartitionStats::to_json() const {
  nlohmann::ordered_json j;
  j["ranks"] = per_rank.size();
  j["num_trees"] = num_trees;
  j["trees_sent"] = total_trees_sent();
  j["ghosts_sent"] = total_ghosts_sent();
  j["bytes_sent"] = total_bytes_sent();
  j["wire_messages"] = wire_messages();
  j["mean_S_size"] = mean_S_size();
  j["shared_trees"] = shared_tree_count;
  j["wall_time_s"] = wall_time_s;
  return j.dump(2);
}

VerifyReport verify_world(const World& world, const GlobalMesh& reference) {
  VerifyReport rep;
  auto& d = rep.diffs;
  if (world.size() == 0) {
    d.push_back("world has no ranks");
    return rep;
  }
  const OffsetArray& offsets = world.offsets();
  if (offsets.num_trees() != reference.num_trees()) {
    d.push_back("world has K=" + std::to_string(offsets.num_trees()) + ", reference has " +
                std::to_string(reference.num_trees()));
    return rep;
  }
  if (auto v = is_valid(offsets); !v) {
    for (auto& s : v.diagnostics) d.push_back("offsets: " + s);
    return rep;
  }

  for (Rank p = 0; p < world.size(); ++p) {
    const Cmesh& c = world.rank(p);
    const std::string where = "rank " + std::to_string(p) + ": ";
    if (!(c.offsets == offsets)) d.push_back(where + "offset table differs from rank 0");
    auto problems = check_cmesh(c);
    d.insert(d.end(), problems.begin(), problems.end());
    if (!problems.empty()) continue;

    for (LocalIndex l = 0; l < c.num_local(); ++l) {
      const GlobalIndex k = c.global_id(l);
      const auto& ref = reference.trees[k];
      const auto& t = c.trees[l];
      if (t.eclass != ref.eclass || t.tree_to_face != ref.faces || t.tree_data != ref.data) {
        d.push_back(where + "tree " + std::to_string(k) + " class, faces or data differ");
        continue;
      }
      for (std::size_t f = 0; f < ref.neighbors.size(); ++f) {
        const GlobalIndex got = c.resolve(t.tree_to_tree[f]);
        if (got != ref.neighbors[f]) {
          d.push_back(where + "tree " + std::to_string(k) + " face " + std::to_string(f) +
                      " resolves to " + std::to_string(got) + ", expected " +
                      std::to_string(ref.neighbors[f]));
        }
      }
    }

    const auto expected = ghost_set(offsets, p, reference);
    std::vector<GlobalIndex> got;
    for (const auto& g : c.ghosts) {
      got.push_back(g.id);
      if (g.id < 0 || g.id >= reference.num_trees()) {
        d.push_back(where + "ghost id " + std::to_string(g.id) + " out of range");
        continue;
      }
      const auto& ref = reference.trees[g.id];
      if (g.eclass != ref.eclass || g.tree_to_tree != ref.neighbors || g.tree_to_face != ref.faces) {
        d.push_back(where + "ghost " + std::to_string(g.id) + " differs from reference");
      }
    }
    std::sort(got.begin(), got.end());
    std::vector<GlobalIndex> missing, extra;
    std::set_difference(expected.begin(), expected.end(), got.begin(), got.end(),
                        std::back_inserter(missing));
    std::set_difference(got.begin(), got.end(), expected.begin(), expected.end(),
                        std::back_inserter(extra));
    for (auto g : missing) d.push_back(where + "missing ghost " + std::to_string(g));
    for (auto g : extra) d.push_back(where + "unexpected ghost " + std::to_string(g));
  }
  return rep;
}

std::string serialize_world(const World& world) {
  std::ostringstream os;
  for (const auto& c : world.ranks()) {
    os << "rank " << c.rank << ' ' << to_string(c.offsets) << '\n';
    for (LocalIndex l = 0; l < c.num_local(); ++l) {
      const auto& t = c.trees[l];
      os << "  tree " << c.global_id(l) << ' ' << to_string(t.eclass);
      for (std::size_t f = 0; f < t.tree_to_tree.size(); ++f) {
        os << ' ' << t.tree_to_tree[f] << ':' << t.tree_to_face[f].value();
      }
      os << " data=" << to_hex(t.tree_data) << '\n';
    }
    for (const auto& g : c.ghosts) {
      os << "  ghost " << g.id << ' ' << to_string(g.eclass);
      for (std::size_t f = 0; f < g.tree_to_tree.size(); ++f) {
        os << ' ' << g.tree_to_tree[f] << ':' << g.tree_to_face[f].value();
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace cmeshpart
