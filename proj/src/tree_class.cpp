#include "cmeshpart/tree_class.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace cmeshpart {

namespace {

struct ClassInfo {
  std::string_view name;
  int dim;
  int num_vertices;
  int num_faces;
  // Face -> vertex list, -1 padded. Faces of quads and hexes are ordered
  // -x,+x,-y,+y,-z,+z with z-order vertex numbering; simplex face i is
  // opposite vertex i.
  std::array<std::array<int, 4>, 6> faces;
  std::array<int, 6> face_sizes;
};

constexpr std::array<ClassInfo, kNumTreeClasses> kClassInfo{{
    {"point", 0, 1, 0, {}, {}},
    {"line", 1, 2, 2, {{{0, -1, -1, -1}, {1, -1, -1, -1}}}, {1, 1}},
    {"quad",
     2,
     4,
     4,
     {{{0, 2, -1, -1}, {1, 3, -1, -1}, {0, 1, -1, -1}, {2, 3, -1, -1}}},
     {2, 2, 2, 2}},
    {"triangle", 2, 3, 3, {{{1, 2, -1, -1}, {0, 2, -1, -1}, {0, 1, -1, -1}}}, {2, 2, 2}},
    {"hex",
     3,
     8,
     6,
     {{{0, 2, 4, 6}, {1, 3, 5, 7}, {0, 1, 4, 5}, {2, 3, 6, 7}, {0, 1, 2, 3}, {4, 5, 6, 7}}},
     {4, 4, 4, 4, 4, 4}},
    {"tet",
     3,
     4,
     4,
     {{{1, 2, 3, -1}, {0, 2, 3, -1}, {0, 1, 3, -1}, {0, 1, 2, -1}}},
     {3, 3, 3, 3}},
    {"prism",
     3,
     6,
     5,
     {{{1, 2, 4, 5}, {0, 2, 3, 5}, {0, 1, 3, 4}, {0, 1, 2, -1}, {3, 4, 5, -1}}},
     {4, 4, 4, 3, 3}},
    {"pyramid",
     3,
     5,
     5,
     {{{0, 2, 4, -1}, {1, 3, 4, -1}, {0, 1, 4, -1}, {2, 3, 4, -1}, {0, 1, 2, 3}}},
     {3, 3, 3, 3, 4}},
}};

const ClassInfo& info(TreeClass c) {
  const auto i = static_cast<std::size_t>(c);
  if (i >= kClassInfo.size()) {
    throw RangeError("unknown tree class " + std::to_string(i));
  }
  return kClassInfo[i];
}

void check_face(TreeClass c, int face) {
  if (face < 0 || face >= info(c).num_faces) {
    throw RangeError("face " + std::to_string(face) + " out of range for " +
                     std::string(info(c).name));
  }
}

}  // namespace

int dimension(TreeClass c) { return info(c).dim; }
int num_faces(TreeClass c) { return info(c).num_faces; }
int num_vertices(TreeClass c) { return info(c).num_vertices; }

int face_corner_count(TreeClass c, int face) {
  check_face(c, face);
  return info(c).face_sizes[face];
}

std::span<const int> face_vertices(TreeClass c, int face) {
  check_face(c, face);
  const auto& i = info(c);
  return {i.faces[face].data(), static_cast<std::size_t>(i.face_sizes[face])};
}

int max_faces(int dim) {
  switch (dim) {
    case 0:
      return 1;  // points have no faces; keeps FaceCode arithmetic defined
    case 1:
      return 2;
    case 2:
      return 4;
    case 3:
      return 6;
    default:
      throw RangeError("dimension " + std::to_string(dim) + " out of range");
  }
}

std::string_view to_string(TreeClass c) { return info(c).name; }

std::optional<TreeClass> tree_class_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kClassInfo.size(); ++i) {
    if (kClassInfo[i].name == s) return static_cast<TreeClass>(i);
  }
  return std::nullopt;
}

bool class_less(TreeClass a, TreeClass b) {
  using enum TreeClass;
  switch (a) {
    case hex:
    case tet:
      return b == prism || b == pyramid;
    case prism:
      return b == pyramid;
    default:
      return false;
  }
}

int compute_orientation(TreeClass t, int f, TreeClass t_prime, int f_prime, int xi,
                        int xi_prime) {
  const int corners = face_corner_count(t, f);
  if (corners != face_corner_count(t_prime, f_prime)) {
    throw std::invalid_argument("face mismatch");
  }
  if (xi < 0 || xi >= corners || xi_prime < 0 || xi_prime >= corners) {
    throw RangeError("face corner out of range");
  }
  if (class_less(t, t_prime) || (t == t_prime && f <= f_prime)) return xi;
  return xi_prime;
}

FaceCode FaceCode::encode(int orientation, int neighbor_face, int dim) {
  const int F = max_faces(dim);
  if (neighbor_face < 0 || neighbor_face >= F) {
    throw RangeError("neighbor face " + std::to_string(neighbor_face) +
                     " out of range for dimension " + std::to_string(dim));
  }
  if (orientation < 0) throw RangeError("negative orientation");
  return FaceCode(orientation * F + neighbor_face);
}

}  // namespace cmeshpart
