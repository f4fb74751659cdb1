// Command-line front end: mesh generation, partition tables, communication
// patterns, ghost plans, benchmarks and invariant checks.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or parse error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cmeshpart/comm_pattern.hpp"
#include "cmeshpart/forest.hpp"
#include "cmeshpart/ghost_rules.hpp"
#include "cmeshpart/meshgen.hpp"
#include "cmeshpart/sim_runtime.hpp"

using namespace cmeshpart;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

// Usage errors detected after CLI11 has parsed the flags.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  int ranks = 0;
  std::string brick;
  double shift = 0.43;
  std::string forest;
  bool band = false;
  int steps = 1;
  std::uint64_t seed = 1;
  std::string dump_messages;
  std::string out;
  std::string scenario;
  std::string mesh_file;
  std::string old_offsets, new_offsets;
  int dim = 3;
  bool connected = false;
  GlobalIndex random_trees = -1;
  int trials = 0;
  int threads = 0;
};

struct Scenario {
  GlobalMesh mesh;
  OffsetArray old_offsets;
  OffsetArray new_offsets;
};

Scenario named_scenario(const std::string& name) {
  if (name == "example") {
    return {quad_strip(5), OffsetArray::from_entries({0, -2, 3, 5}),
            OffsetArray::from_entries({0, -3, -4, 5})};
  }
  if (name == "ring") {
    return {three_tree_ring(), OffsetArray::from_entries({0, 1, 3, 3}),
            OffsetArray::from_entries({0, -1, 2, 3})};
  }
  throw UsageError("unknown scenario '" + name + "' (expected example or ring)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BrickSpec parse_brick(const std::string& text, int ranks, int dim, bool connected) {
  BrickSpec s;
  s.ranks = ranks;
  s.dim = dim;
  s.connected = connected;
  std::vector<int> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("bad --brick '" + text + "' (expected NXxNYxNZ)");
    }
  }
  if (v.size() != static_cast<std::size_t>(dim)) {
    throw UsageError("--brick needs " + std::to_string(dim) + " extents in " +
                     std::to_string(dim) + "D");
  }
  s.nx = v[0];
  s.ny = v[1];
  if (dim == 3) s.nz = v[2];
  if (s.nx < 1 || s.ny < 1 || s.nz < 1) throw UsageError("brick extents must be >= 1");
  return s;
}

// `K=<K>` alone means a uniform synthetic forest of K trees; otherwise the
// value is a forest line, with or without its leading keyword, or a file
// holding one.
ForestSummary forest_from_flag(const std::string& value, int dim, GlobalIndex* synthetic_k) {
  std::string text = value;
  if (std::filesystem::is_regular_file(value)) {
    text = read_file(value);
    text = text.substr(0, text.find('\n'));
  }
  if (text.rfind("K=", 0) == 0 && text.find(':') == std::string::npos) {
    GlobalIndex K = 0;
    try {
      std::size_t used = 0;
      K = std::stoll(text.substr(2), &used);
      if (used != text.size() - 2) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw UsageError("bad --forest '" + value + "'");
    }
    if (K < 1) throw UsageError("--forest needs K >= 1");
    if (synthetic_k) *synthetic_k = K;
    return synthetic_band_forest(K, 1, {}, dim);
  }
  if (text.rfind("forest", 0) != 0) text = "forest " + text;
  return parse_forest(text);
}

std::string rank_list(const std::vector<Rank>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s + "]";
}

std::string id_list(const std::vector<GlobalIndex>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s + "]";
}

std::string tree_list(const TreeRange& r) {
  std::vector<GlobalIndex> v;
  for (GlobalIndex k = r.first; k <= r.last; ++k) v.push_back(k);
  return id_list(v);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

// Mesh and offsets named by --scenario, or by --mesh with --old/--new.
Scenario scenario_from(const Options& o) {
  if (!o.scenario.empty()) return named_scenario(o.scenario);
  if (o.old_offsets.empty() || o.new_offsets.empty()) {
    throw UsageError("give --scenario, or --old and --new offset lines");
  }
  Scenario s;
  s.old_offsets = parse_offsets(o.old_offsets);
  s.new_offsets = parse_offsets(o.new_offsets);
  if (!o.mesh_file.empty()) s.mesh = parse_mesh(read_file(o.mesh_file));
  return s;
}

// ---------------------------------------------------------------------------

int cmd_generate(const Options& o) {
  GlobalMesh mesh;
  OffsetArray offsets;
  if (!o.brick.empty()) {
    if (o.ranks < 1) throw UsageError("--brick needs --ranks");
    const auto spec = parse_brick(o.brick, o.ranks, o.dim, o.connected);
    mesh = brick_mesh(spec);
    offsets = brick_offsets(spec);
  } else if (o.random_trees >= 0) {
    std::mt19937_64 rng(o.seed);
    mesh = random_mesh(rng, o.random_trees, o.dim);
    offsets = partition_from_forest(synthetic_band_forest(o.random_trees, 0, {}, o.dim),
                                    std::max(o.ranks, 1));
  } else {
    throw UsageError("generate needs --brick or --random");
  }
  write_output(o.out, dump_mesh(mesh));
  if (!o.out.empty() && o.out != "-") std::cout << to_string(offsets) << '\n';
  return kOk;
}

int cmd_partition(const Options& o) {
  if (!o.forest.empty()) {
    if (o.ranks < 1) throw UsageError("--forest needs --ranks");
    const auto forest = forest_from_flag(o.forest, o.dim, nullptr);
    const auto offsets = partition_from_forest(forest, o.ranks);
    std::cout << to_string(forest) << '\n' << to_string(offsets) << '\n';
    std::cout << "shared trees: " << shared_tree_count(offsets) << '\n';
    return kOk;
  }
  if (!o.brick.empty()) {
    if (o.ranks < 1) throw UsageError("--brick needs --ranks");
    const auto spec = parse_brick(o.brick, o.ranks, o.dim, o.connected);
    const auto old_offsets = brick_offsets(spec);
    std::cout << "old " << to_string(old_offsets) << '\n'
              << "new " << to_string(shift_partition(old_offsets, o.shift)) << '\n';
    return kOk;
  }
  if (!o.old_offsets.empty()) {
    const auto offsets = parse_offsets(o.old_offsets);
    const auto rep = is_valid(offsets);
    for (Rank p = 0; p < offsets.world_size(); ++p) {
      std::cout << "rank " << p << " first=" << offsets.first_tree(p)
                << " last=" << offsets.last_tree(p) << " n=" << offsets.num_local_trees(p)
                << (offsets.first_shared(p) ? " shared" : "") << '\n';
    }
    for (const auto& d : rep.diagnostics) std::cout << "invalid: " << d << '\n';
    return rep.valid() ? kOk : kVerifyFailed;
  }
  throw UsageError("partition needs --forest, --brick or --old");
}

int cmd_pattern(const Options& o) {
  const auto s = scenario_from(o);
  const auto& a = s.old_offsets;
  const auto& b = s.new_offsets;
  std::cout << "old " << to_string(a) << '\n' << "new " << to_string(b) << '\n';
  for (Rank p = 0; p < a.world_size(); ++p) {
    std::cout << "rank " << p << " S=" << rank_list(compute_S(a, b, p))
              << " R=" << rank_list(compute_R(a, b, p)) << '\n';
  }
  for (Rank p = 0; p < a.world_size(); ++p) {
    for (Rank q : compute_S(a, b, p)) {
      std::cout << "send " << p << " -> " << q << " trees " << tree_list(*send_range(a, b, p, q))
                << '\n';
    }
  }
  return kOk;
}

int cmd_ghosts(const Options& o) {
  const auto s = scenario_from(o);
  if (s.mesh.num_trees() != s.old_offsets.num_trees()) {
    throw UsageError("ghosts needs a mesh (--scenario or --mesh)");
  }
  for (Rank p = 0; p < s.old_offsets.world_size(); ++p) {
    const auto c = extract_cmesh(s.mesh, s.old_offsets, p);
    for (const auto& plan : plan_sends(c, s.new_offsets)) {
      std::vector<GlobalIndex> g;
      for (const auto& r : plan.ghosts) g.push_back(r.id);
      std::cout << p << " -> " << plan.to << " : trees " << tree_list(plan.trees) << " ghosts "
                << id_list(g) << '\n';
    }
  }
  return kOk;
}

// Invariants checked on one repartition. Returns the first failure.
std::optional<std::string> check_invariants(const GlobalMesh& mesh, const OffsetArray& a,
                                            const OffsetArray& b, int threads) {
  if (auto v = validate_global_connectivity(mesh); !v.empty()) {
    return "connectivity: " + describe(v.front());
  }
  if (auto r = is_valid(a); !r) return "old partition: " + r.diagnostics.front();
  if (auto r = is_valid(b); !r) return "new partition: " + r.diagnostics.front();
  if (!(encode_offsets(decode_offsets(b)) == b)) return "codec round trip";
  const int P = a.world_size();
  std::vector<std::vector<Rank>> S(P), R(P);
  for (Rank p = 0; p < P; ++p) {
    S[p] = compute_S(a, b, p);
    R[p] = compute_R(a, b, p);
  }
  for (Rank p = 0; p < P; ++p) {
    for (Rank q : S[p]) {
      if (!std::binary_search(R[q].begin(), R[q].end(), p)) {
        return "pattern duality: " + std::to_string(q) + " in S_" + std::to_string(p) +
               " but " + std::to_string(p) + " not in R_" + std::to_string(q);
      }
    }
  }

  World world = World::distribute(mesh, a);
  RepartitionOptions opt;
  opt.threads = threads;
  opt.record_messages = true;
  PartitionStats stats;
  try {
    stats = run_repartition(world, b, opt);
  } catch (const std::exception& e) {
    return std::string("repartition: ") + e.what();
  }
  std::map<std::pair<GlobalIndex, Rank>, int> trees, ghosts;
  for (const auto& m : stats.messages) {
    if (m.from != m.to && !std::binary_search(R[m.to].begin(), R[m.to].end(), m.from)) {
      return "minimality: wire sender " + std::to_string(m.from) + " not in R_" +
             std::to_string(m.to);
    }
    for (auto k : m.trees) {
      if (++trees[{k, m.to}] > 1) {
        return "minimality: tree " + std::to_string(k) + " delivered twice to rank " +
               std::to_string(m.to);
      }
    }
    for (auto g : m.ghosts) {
      if (++ghosts[{g, m.to}] > 1) {
        return "minimality: ghost " + std::to_string(g) + " delivered twice to rank " +
               std::to_string(m.to);
      }
    }
  }
  if (auto rep = verify_world(world, mesh); !rep.ok()) return "verify: " + rep.diffs.front();

  World same = World::distribute(mesh, b);
  if (run_repartition(same, b, opt).total_bytes_sent() != 0) return "idempotence: bytes sent";
  return std::nullopt;
}

int cmd_verify(const Options& o) {
  auto fail = [](const std::string& what) {
    std::cout << "verification: FAIL: " << what << '\n';
    return kVerifyFailed;
  };
  if (o.trials > 0) {
    std::mt19937_64 rng(o.seed);
    for (int t = 0; t < o.trials; ++t) {
      const GlobalIndex K = 1 + static_cast<GlobalIndex>(rng() % 50);
      const int P = 1 + static_cast<int>(rng() % 12);
      const auto mesh = random_mesh(rng, K, 2 + static_cast<int>(rng() % 2));
      const auto a = random_partition(rng, K, P);
      const auto b = random_partition(rng, K, P);
      if (auto err = check_invariants(mesh, a, b, 1)) {
        return fail("trial " + std::to_string(t) + ": " + *err);
      }
    }
    std::cout << "trials: " << o.trials << ", failures: 0\nverification: pass\n";
    return kOk;
  }
  Scenario s;
  if (!o.scenario.empty()) {
    s = named_scenario(o.scenario);
  } else if (!o.mesh_file.empty()) {
    s.mesh = parse_mesh(read_file(o.mesh_file));
    if (!o.old_offsets.empty()) {
      s.old_offsets = parse_offsets(o.old_offsets);
    } else {
      if (o.ranks < 1) throw UsageError("--mesh needs --ranks or --old");
      ForestSummary uniform;
      uniform.leaf_counts.assign(static_cast<std::size_t>(s.mesh.num_trees()), 1);
      s.old_offsets = partition_from_forest(uniform, o.ranks);
    }
    if (!o.new_offsets.empty()) {
      s.new_offsets = parse_offsets(o.new_offsets);
    } else if (shared_tree_count(s.old_offsets) == 0) {
      s.new_offsets = shift_partition(s.old_offsets, o.shift);
    } else {
      throw UsageError("--shift needs an old partition without shared trees");
    }
  } else {
    throw UsageError("verify needs --scenario, --mesh or --trials");
  }
  if (s.new_offsets.num_trees() != s.mesh.num_trees() ||
      s.old_offsets.num_trees() != s.mesh.num_trees()) {
    return fail("offset tables do not match the mesh size");
  }
  if (auto err = check_invariants(s.mesh, s.old_offsets, s.new_offsets, o.threads)) {
    return fail(*err);
  }
  std::cout << "verification: pass\n";
  return kOk;
}

// One rotating band of refined trees per step; the band covers an eighth of
// the trees and advances by that much each step.
std::set<GlobalIndex> band_at(GlobalIndex K, int step) {
  const GlobalIndex width = std::max<GlobalIndex>(1, K / 8);
  std::set<GlobalIndex> band;
  for (GlobalIndex i = 0; i < width; ++i) band.insert((step * width + i) % K);
  return band;
}

int cmd_bench(const Options& o) {
  if (o.ranks < 1) throw UsageError("bench needs --ranks >= 1");
  if (o.steps < 1) throw UsageError("--steps must be >= 1");
  GlobalMesh mesh;
  OffsetArray start;
  std::vector<OffsetArray> targets;
  std::string label;
  if (!o.brick.empty()) {
    const auto spec = parse_brick(o.brick, o.ranks, o.dim, o.connected);
    mesh = brick_mesh(spec);
    start = brick_offsets(spec);
    OffsetArray cur = start;
    for (int s = 0; s < o.steps; ++s) {
      cur = shift_partition(cur, o.shift);
      targets.push_back(cur);
    }
    label = "brick " + o.brick + " x " + std::to_string(o.ranks) + " ranks, shift " +
            std::to_string(o.shift);
  } else if (!o.forest.empty()) {
    GlobalIndex K = -1;
    const auto forest = forest_from_flag(o.forest, o.dim, &K);
    if (K < 0) K = forest.num_trees();
    std::mt19937_64 rng(o.seed);
    mesh = random_mesh(rng, K, o.dim);
    if (o.band) {
      const int base = 1;
      start = partition_from_forest(synthetic_band_forest(K, base, {}, o.dim), o.ranks);
      for (int s = 0; s < o.steps; ++s) {
        targets.push_back(
            partition_from_forest(synthetic_band_forest(K, base, band_at(K, s), o.dim), o.ranks));
      }
      label = "moving band over " + std::to_string(K) + " trees, " + std::to_string(o.ranks) +
              " ranks";
    } else {
      ForestSummary uniform;
      uniform.leaf_counts.assign(static_cast<std::size_t>(K), 1);
      start = partition_from_forest(uniform, o.ranks);
      for (int s = 0; s < o.steps; ++s) targets.push_back(partition_from_forest(forest, o.ranks));
      label = "forest over " + std::to_string(K) + " trees, " + std::to_string(o.ranks) + " ranks";
    }
  } else {
    throw UsageError("bench needs --brick or --forest");
  }

  World world = World::distribute(mesh, start);
  std::ostringstream csv;
  nlohmann::ordered_json json = nlohmann::ordered_json::array();
  csv << "step,rank,trees_sent,ghosts_sent,bytes,S_size\n";
  int verified = 0;
  double total_time = 0;
  std::int64_t total_bytes = 0, total_trees = 0, total_ghosts = 0;
  double mean_s = 0;
  std::cout << "bench: " << label << ", K=" << mesh.num_trees() << '\n';
  for (int s = 0; s < o.steps; ++s) {
    RepartitionOptions opt;
    opt.threads = o.threads;
    if (!o.dump_messages.empty()) {
      opt.dump_dir = (std::filesystem::path(o.dump_messages) / ("step_" + std::to_string(s))).string();
    }
    const auto stats = run_repartition(world, targets[s], opt);
    const auto rep = verify_world(world, mesh);
    if (rep.ok()) ++verified;
    total_time += stats.wall_time_s;
    total_bytes += stats.total_bytes_sent();
    total_trees += stats.total_trees_sent();
    total_ghosts += stats.total_ghosts_sent();
    mean_s += stats.mean_S_size() / o.steps;

    std::istringstream rows(stats.to_csv());
    std::string row;
    std::getline(rows, row);  // header
    while (std::getline(rows, row)) csv << s << ',' << row << '\n';
    auto j = nlohmann::ordered_json::parse(stats.to_json());
    j["step"] = s;
    j["verified"] = rep.ok();
    json.push_back(j);

    std::printf("step %d: %lld trees and %lld ghosts sent in %lld messages, %lld bytes, "
                "mean |S_p| %.3f, %s\n",
                s, static_cast<long long>(stats.total_trees_sent()),
                static_cast<long long>(stats.total_ghosts_sent()),
                static_cast<long long>(stats.wire_messages()),
                static_cast<long long>(stats.total_bytes_sent()), stats.mean_S_size(),
                rep.ok() ? "verified" : ("FAILED: " + rep.diffs.front()).c_str());
  }
  const double rate = total_time > 0 ? static_cast<double>(mesh.num_trees()) * o.steps / total_time
                                     : 0.0;
  std::printf("trees/sec (aggregate): %.4g\n", rate);
  std::printf("trees/sec per simulated rank: %.4g\n", rate / o.ranks);
  std::printf("wire bytes: %lld\n", static_cast<long long>(total_bytes));
  std::printf("trees sent: %lld, ghosts sent: %lld\n", static_cast<long long>(total_trees),
              static_cast<long long>(total_ghosts));
  std::printf("mean |S_p|: %.3f\n", mean_s);
  std::printf("note: simulated ranks on one machine; timings are not comparable to "
              "distributed-memory runs\n");
  std::printf("steps verified: %d/%d\n", verified, o.steps);
  std::printf("verification: %s\n", verified == o.steps ? "pass" : "FAIL");
  std::cout.flush();

  if (!o.out.empty()) {
    write_output(o.out + ".csv", csv.str());
    write_output(o.out + ".json", json.dump(2) + "\n");
  }
  return verified == o.steps ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse mesh partitioning toolkit"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--ranks", o.ranks, "number of simulated ranks")->check(CLI::Range(1, 1 << 24));
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out, "output path");
    sub->add_option("--dim", o.dim, "mesh dimension")->check(CLI::IsMember({2, 3}));
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
  };
  auto mesh_source = [&](CLI::App* sub) {
    sub->add_option("--brick", o.brick, "NXxNYxNZ block of trees per rank");
    sub->add_flag("--connected", o.connected, "glue neighbouring brick blocks");
    sub->add_option("--shift", o.shift, "fraction of trees each rank hands on")
        ->check(CLI::Range(0.0, 0.999999));
  };
  auto pair_source = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "built-in scenario: example or ring");
    sub->add_option("--mesh", o.mesh_file, "mesh dump file");
    sub->add_option("--old", o.old_offsets, "old offsets line");
    sub->add_option("--new", o.new_offsets, "new offsets line");
  };

  auto* gen = app.add_subcommand("generate", "write a mesh dump");
  common(gen);
  mesh_source(gen);
  gen->add_option("--random", o.random_trees, "random mixed-class mesh with this many trees")
      ->check(CLI::NonNegativeNumber);

  auto* part = app.add_subcommand("partition", "compute or inspect offset tables");
  common(part);
  mesh_source(part);
  part->add_option("--forest", o.forest, "K=<K>, a forest line, or a file");
  part->add_option("--old", o.old_offsets, "offsets line to decode");

  auto* pat = app.add_subcommand("pattern", "print S_p, R_p and the send table");
  common(pat);
  pair_source(pat);

  auto* gh = app.add_subcommand("ghosts", "print the trees and ghosts every rank sends");
  common(gh);
  pair_source(gh);

  auto* bench = app.add_subcommand("bench", "run and time repartition steps");
  common(bench);
  mesh_source(bench);
  bench->add_option("--forest", o.forest, "K=<K>, a forest line, or a file");
  bench->add_flag("--band", o.band, "move a refined band through the forest each step");
  bench->add_option("--steps", o.steps, "repartition steps")->check(CLI::Range(1, 1 << 20));
  bench->add_option("--dump-messages", o.dump_messages, "write every wire message here");

  auto* ver = app.add_subcommand("verify", "run the invariant suite");
  common(ver);
  mesh_source(ver);
  pair_source(ver);
  ver->add_option("--trials", o.trials, "random trials")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) return cmd_generate(o);
    if (*part) return cmd_partition(o);
    if (*pat) return cmd_pattern(o);
    if (*gh) return cmd_ghosts(o);
    if (*bench) return cmd_bench(o);
    if (*ver) return cmd_verify(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerifyFailed;
  }
  return kUsage;
}
