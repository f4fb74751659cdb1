#include "cmeshpart/meshgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmeshpart/forest.hpp"

namespace cmeshpart {

GlobalIndex BrickSpec::trees_per_rank() const {
  const GlobalIndex per = static_cast<GlobalIndex>(nx) * ny * (dim == 3 ? nz : 1);
  return per;
}

namespace {

void check_spec(const BrickSpec& s) {
  if (s.dim != 2 && s.dim != 3) throw std::invalid_argument("brick dimension must be 2 or 3");
  if (s.nx < 1 || s.ny < 1 || (s.dim == 3 && s.nz < 1) || s.ranks < 1) {
    throw std::invalid_argument("brick dimensions and rank count must be >= 1");
  }
  const GlobalIndex per = s.trees_per_rank();
  if (per > std::numeric_limits<LocalIndex>::max() ||
      per > std::numeric_limits<GlobalIndex>::max() / s.ranks) {
    throw RangeError("brick tree count overflows");
  }
}

TreeData index_bytes(GlobalIndex k) {
  const auto v = static_cast<std::uint32_t>(k);
  return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
}

}  // namespace

GlobalMesh brick_mesh(const BrickSpec& spec) {
  check_spec(spec);
  const int nz = spec.dim == 3 ? spec.nz : 1;
  const GlobalIndex per = spec.trees_per_rank();
  GlobalMesh mesh;
  mesh.dim = spec.dim;
  mesh.trees.reserve(static_cast<std::size_t>(spec.num_trees()));
  const TreeClass cls = spec.dim == 3 ? TreeClass::hex : TreeClass::quad;
  for (GlobalIndex k = 0; k < spec.num_trees(); ++k) add_tree(mesh, cls, index_bytes(k));

  auto id = [&](int p, int x, int y, int z) {
    return p * per + x + static_cast<GlobalIndex>(spec.nx) * (y + static_cast<GlobalIndex>(spec.ny) * z);
  };
  for (int p = 0; p < spec.ranks; ++p) {
    for (int z = 0; z < nz; ++z) {
      for (int y = 0; y < spec.ny; ++y) {
        for (int x = 0; x < spec.nx; ++x) {
          if (x + 1 < spec.nx) glue_faces(mesh, id(p, x, y, z), 1, id(p, x + 1, y, z), 0);
          if (y + 1 < spec.ny) glue_faces(mesh, id(p, x, y, z), 3, id(p, x, y + 1, z), 2);
          if (z + 1 < nz) glue_faces(mesh, id(p, x, y, z), 5, id(p, x, y, z + 1), 4);
        }
      }
      if (spec.connected && p + 1 < spec.ranks) {
        for (int y = 0; y < spec.ny; ++y) {
          glue_faces(mesh, id(p, spec.nx - 1, y, z), 1, id(p + 1, 0, y, z), 0);
        }
      }
    }
  }
  return mesh;
}

OffsetArray brick_offsets(const BrickSpec& spec) {
  check_spec(spec);
  std::vector<GlobalIndex> e(spec.ranks + 1);
  for (int p = 0; p <= spec.ranks; ++p) e[p] = p * spec.trees_per_rank();
  return OffsetArray::from_entries(std::move(e));
}

BrickWorld brick_world(const BrickSpec& spec) {
  BrickWorld b;
  b.mesh = brick_mesh(spec);
  b.offsets = brick_offsets(spec);
  b.world = World::distribute(b.mesh, b.offsets);
  return b;
}

OffsetArray shift_partition(const OffsetArray& offsets, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("shift fraction must lie in [0, 1)");
  }
  if (shared_tree_count(offsets) != 0) {
    throw PartitionError("shift_partition needs a partition without shared trees");
  }
  const int P = offsets.world_size();
  std::vector<GlobalIndex> moved(P, 0);
  for (Rank p = 0; p + 1 < P; ++p) {
    const auto n = std::max<LocalIndex>(offsets.num_local_trees(p), 0);
    moved[p] = static_cast<GlobalIndex>(std::floor(fraction * n));
  }
  PartitionView view;
  view.num_trees = offsets.num_trees();
  view.ranks.resize(P);
  GlobalIndex prev_last = -1;
  for (Rank p = 0; p < P; ++p) {
    const GlobalIndex first = offsets.first_tree(p) - (p > 0 ? moved[p - 1] : 0);
    const GlobalIndex last = offsets.last_tree(p) - moved[p];
    if (last < first) {
      view.ranks[p] = {prev_last + 1, prev_last, false};
    } else {
      view.ranks[p] = {first, last, false};
      prev_last = last;
    }
  }
  return encode_offsets(view);
}

GlobalMesh two_triangle_mesh() {
  GlobalMesh m;
  m.dim = 2;
  add_tree(m, TreeClass::triangle);
  add_tree(m, TreeClass::triangle);
  glue_faces(m, 0, 0, 1, 0);
  return m;
}

GlobalMesh three_tree_ring() {
  GlobalMesh m;
  m.dim = 2;
  for (int i = 0; i < 3; ++i) add_tree(m, TreeClass::quad, {static_cast<std::uint8_t>(i)});
  glue_faces(m, 0, 1, 1, 0);
  glue_faces(m, 1, 3, 2, 2);
  glue_faces(m, 2, 0, 0, 3, 1);
  return m;
}

GlobalMesh quad_strip(GlobalIndex K) {
  GlobalMesh m;
  m.dim = 2;
  for (GlobalIndex k = 0; k < K; ++k) add_tree(m, TreeClass::quad, index_bytes(k));
  for (GlobalIndex k = 0; k + 1 < K; ++k) glue_faces(m, k, 1, k + 1, 0);
  return m;
}

GlobalMesh random_mesh(std::mt19937_64& rng, GlobalIndex K, int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("random_mesh needs dimension 2 or 3");
  static constexpr TreeClass kClasses2[] = {TreeClass::quad, TreeClass::triangle};
  static constexpr TreeClass kClasses3[] = {TreeClass::hex, TreeClass::tet, TreeClass::prism,
                                            TreeClass::pyramid};
  GlobalMesh m;
  m.dim = dim;
  std::uniform_int_distribution<int> byte(0, 255);
  for (GlobalIndex k = 0; k < K; ++k) {
    const TreeClass c = dim == 2 ? kClasses2[rng() % 2] : kClasses3[rng() % 4];
    TreeData data(rng() % 7);
    for (auto& b : data) b = static_cast<std::uint8_t>(byte(rng));
    add_tree(m, c, std::move(data));
  }

  struct Slot {
    GlobalIndex tree;
    int face;
  };
  std::vector<Slot> open;
  for (GlobalIndex k = 0; k < K; ++k) {
    for (int f = 0; f < num_faces(m.trees[k].eclass); ++f) open.push_back({k, f});
  }
  std::shuffle(open.begin(), open.end(), rng);
  std::vector<bool> used(open.size(), false);
  std::bernoulli_distribution boundary(0.25), nearby(0.6);
  for (std::size_t i = 0; i < open.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    if (boundary(rng)) continue;
    const auto [a, fa] = open[i];
    const int corners = face_corner_count(m.trees[a].eclass, fa);
    const bool want_near = nearby(rng);
    std::vector<std::size_t> cand;
    for (std::size_t j = i + 1; j < open.size(); ++j) {
      if (used[j]) continue;
      const auto [b, fb] = open[j];
      if (face_corner_count(m.trees[b].eclass, fb) != corners) continue;
      if (want_near && std::abs(b - a) > 3) continue;
      cand.push_back(j);
    }
    if (cand.empty()) continue;
    const std::size_t j = cand[rng() % cand.size()];
    used[j] = true;
    const auto [b, fb] = open[j];
    glue_faces(m, a, fa, b, fb, static_cast<int>(rng() % corners));
  }
  return m;
}

OffsetArray random_partition(std::mt19937_64& rng, GlobalIndex K, int P) {
  ForestSummary f;
  f.leaf_counts.resize(static_cast<std::size_t>(K));
  for (auto& n : f.leaf_counts) n = 1 + static_cast<std::int64_t>(rng() % 6);
  const std::int64_t N = f.num_leaves();
  LeafCuts cuts(P + 1);
  cuts[0] = 0;
  cuts[P] = N;
  // Mix uniform cuts with clustered ones so that empty ranks and trees
  // shared by many ranks both show up.
  const bool clustered = rng() % 3 == 0;
  const std::int64_t centre = N > 0 ? static_cast<std::int64_t>(rng() % (N + 1)) : 0;
  for (int p = 1; p < P; ++p) {
    if (clustered && rng() % 2 == 0) {
      const std::int64_t jitter = static_cast<std::int64_t>(rng() % 5) - 2;
      cuts[p] = std::clamp<std::int64_t>(centre + jitter, 0, N);
    } else {
      cuts[p] = N > 0 ? static_cast<std::int64_t>(rng() % (N + 1)) : 0;
    }
  }
  std::sort(cuts.begin(), cuts.end());
  return partition_from_cuts(f, cuts);
}

}  // namespace cmeshpart
