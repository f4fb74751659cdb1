#pragma once

#include <random>

#include "cmeshpart/connectivity.hpp"
#include "cmeshpart/offset_array.hpp"
#include "cmeshpart/sim_runtime.hpp"

namespace cmeshpart {

/// One nx x ny (x nz) block of quads or hexes per rank.
struct BrickSpec {
  int nx = 1;
  int ny = 1;
  int nz = 1;  // ignored in 2D
  int ranks = 1;
  int dim = 3;
  /// Glue block p's +x side to block p+1's -x side. Off by default: the
  /// blocks form a disjoint union.
  bool connected = false;

  GlobalIndex trees_per_rank() const;
  GlobalIndex num_trees() const { return trees_per_rank() * ranks; }
};

struct BrickWorld {
  GlobalMesh mesh;
  OffsetArray offsets;
  World world;
};

/// Trees in block p are numbered x fastest, then y, then z, offset by
/// p * trees_per_rank. Axis-aligned neighbors connect with orientation 0;
/// tree data is the 4-byte little-endian global index.
GlobalMesh brick_mesh(const BrickSpec& spec);
/// Rank p holds block p; nothing is shared.
OffsetArray brick_offsets(const BrickSpec& spec);
BrickWorld brick_world(const BrickSpec& spec);

/// Every rank p < P-1 hands the last floor(fraction * n_p) trees of its
/// original range to p+1; the last rank keeps all its trees. Requires a
/// partition without shared trees and 0 <= fraction < 1.
OffsetArray shift_partition(const OffsetArray& offsets, double fraction);

/// Two triangles sharing one face (4 boundary faces).
GlobalMesh two_triangle_mesh();
/// Three quads, each face-adjacent to the other two.
GlobalMesh three_tree_ring();
/// K quads in a row, tree k's +x face glued to tree k+1's -x face.
GlobalMesh quad_strip(GlobalIndex K);

/// Random consistent connectivity of K trees of dimension 2 or 3 (mixed
/// classes, random orientations, boundaries, self-connections via distinct
/// faces) with random tree data.
GlobalMesh random_mesh(std::mt19937_64& rng, GlobalIndex K, int dim);

/// Random valid partition of K trees to P ranks, including shared trees and
/// empty ranks.
OffsetArray random_partition(std::mt19937_64& rng, GlobalIndex K, int P);

}  // namespace cmeshpart
