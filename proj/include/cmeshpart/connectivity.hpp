#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cmeshpart/tree_class.hpp"
#include "cmeshpart/types.hpp"

namespace cmeshpart {

using TreeData = std::vector<std::uint8_t>;

/// One tree of an unpartitioned coarse mesh. A face whose neighbor is the
/// tree itself at the same face number is a domain boundary.
struct GlobalTree {
  TreeClass eclass = TreeClass::quad;
  std::vector<GlobalIndex> neighbors;
  std::vector<FaceCode> faces;
  TreeData data;

  friend bool operator==(const GlobalTree&, const GlobalTree&) = default;
};

/// Replicated (single-rank) view of a whole coarse mesh. Used as input to
/// the generators, as the verification reference, and for the text dump.
struct GlobalMesh {
  int dim = 2;
  std::vector<GlobalTree> trees;

  GlobalIndex num_trees() const { return static_cast<GlobalIndex>(trees.size()); }
  bool is_boundary(GlobalIndex k, int face) const;

  friend bool operator==(const GlobalMesh&, const GlobalMesh&) = default;
};

/// Adds a tree with all faces marked as boundary and returns its index.
GlobalIndex add_tree(GlobalMesh& mesh, TreeClass eclass, TreeData data = {});

/// Glues face `f` of tree `a` to face `f_prime` of tree `b` with the given
/// orientation, writing both sides.
void glue_faces(GlobalMesh& mesh, GlobalIndex a, int f, GlobalIndex b, int f_prime,
                int orientation = 0);

struct Violation {
  GlobalIndex tree = 0;
  int face = 0;
  GlobalIndex other = -1;
  std::string what;
};

/// Checks the mesh for mutual consistency of all face connections and for the
/// boundary convention. An empty result means the mesh is valid.
std::vector<Violation> validate_global_connectivity(const GlobalMesh& mesh);

std::string describe(const Violation& v);

/// Line-based text dump:
///   cmesh v1 dim=<d> K=<K>
///   tree <k> <class> ; <nbr>:<code> ... ; data=<hex>
/// with boundary faces written as `B`.
void write_mesh(std::ostream& out, const GlobalMesh& mesh);
std::string dump_mesh(const GlobalMesh& mesh);

/// Throws ParseError with the offending line number.
GlobalMesh read_mesh(std::istream& in);
GlobalMesh parse_mesh(std::string_view text);

std::string to_hex(const TreeData& data);
TreeData from_hex(std::string_view hex);

}  // namespace cmeshpart
