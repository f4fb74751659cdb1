#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "cmeshpart/types.hpp"

namespace cmeshpart {

enum class TreeClass : std::uint8_t {
  point = 0,
  line,
  quad,
  triangle,
  hex,
  tet,
  prism,
  pyramid,
};

inline constexpr int kNumTreeClasses = 8;

int dimension(TreeClass c);
int num_faces(TreeClass c);
int num_vertices(TreeClass c);
int face_corner_count(TreeClass c, int face);

/// Tree vertices of `face`, ordered by ascending vertex number. The position
/// in the returned span is the face corner number.
std::span<const int> face_vertices(TreeClass c, int face);

/// Maximum face count over all classes of dimension `dim` (2 in 1D, 4 in 2D,
/// 6 in 3D).
int max_faces(int dim);

std::string_view to_string(TreeClass c);
std::optional<TreeClass> tree_class_from_string(std::string_view s);

/// Semiorder on tree classes used to pick the reference face of a face
/// connection: hex < prism < pyramid and tet < prism. Classes of different
/// dimension or unrelated 3D classes compare false both ways; same classes
/// compare false too.
bool class_less(TreeClass a, TreeClass b);

/// Orientation of the connection between face `f` of a tree of class `t` and
/// face `f_prime` of a tree of class `t_prime`. `xi` is the face corner of
/// `f_prime` matching corner 0 of `f`, `xi_prime` the face corner of `f`
/// matching corner 0 of `f_prime`.
///
/// Throws std::invalid_argument("face mismatch") if the faces have different
/// corner counts, RangeError on out-of-range faces or corners.
int compute_orientation(TreeClass t, int f, TreeClass t_prime, int f_prime, int xi,
                        int xi_prime);

/// Packed neighbor face and orientation, value = orientation * F + face.
class FaceCode {
 public:
  constexpr FaceCode() = default;

  /// Throws RangeError if `neighbor_face` is not below max_faces(dim) or
  /// the orientation is negative.
  static FaceCode encode(int orientation, int neighbor_face, int dim);
  static constexpr FaceCode from_raw(std::int32_t value) { return FaceCode(value); }

  constexpr std::int32_t value() const { return value_; }
  int orientation(int dim) const { return value_ / max_faces(dim); }
  int neighbor_face(int dim) const { return value_ % max_faces(dim); }

  friend constexpr bool operator==(FaceCode, FaceCode) = default;

 private:
  constexpr explicit FaceCode(std::int32_t v) : value_(v) {}
  std::int32_t value_ = 0;
};

struct DecodedFace {
  int orientation;
  int neighbor_face;
  friend bool operator==(const DecodedFace&, const DecodedFace&) = default;
};

inline DecodedFace decode_face(FaceCode code, int dim) {
  return {code.orientation(dim), code.neighbor_face(dim)};
}

}  // namespace cmeshpart
