#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <numeric>
#include <vector>

#include "cmeshpart/tree_class.hpp"

using namespace cmeshpart;

TEST(TreeClass, FaceCountsAndDimensions) {
  EXPECT_EQ(num_faces(TreeClass::line), 2);
  EXPECT_EQ(num_faces(TreeClass::quad), 4);
  EXPECT_EQ(num_faces(TreeClass::triangle), 3);
  EXPECT_EQ(num_faces(TreeClass::hex), 6);
  EXPECT_EQ(num_faces(TreeClass::tet), 4);
  EXPECT_EQ(num_faces(TreeClass::prism), 5);
  EXPECT_EQ(num_faces(TreeClass::pyramid), 5);
  EXPECT_EQ(dimension(TreeClass::point), 0);
  EXPECT_EQ(dimension(TreeClass::triangle), 2);
  EXPECT_EQ(dimension(TreeClass::pyramid), 3);
  EXPECT_EQ(max_faces(2), 4);
  EXPECT_EQ(max_faces(3), 6);
}

TEST(TreeClass, FaceVerticesFollowNumberingConvention) {
  // quads and hexes: -x,+x,-y,+y,-z,+z
  EXPECT_EQ(std::vector<int>(face_vertices(TreeClass::hex, 1).begin(),
                             face_vertices(TreeClass::hex, 1).end()),
            (std::vector<int>{1, 3, 5, 7}));
  EXPECT_EQ(std::vector<int>(face_vertices(TreeClass::quad, 2).begin(),
                             face_vertices(TreeClass::quad, 2).end()),
            (std::vector<int>{0, 1}));
  // simplices: face i is opposite vertex i
  for (int f = 0; f < 4; ++f) {
    auto v = face_vertices(TreeClass::tet, f);
    EXPECT_EQ(std::count(v.begin(), v.end(), f), 0);
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
  }
  EXPECT_EQ(face_corner_count(TreeClass::prism, 0), 4);
  EXPECT_EQ(face_corner_count(TreeClass::prism, 3), 3);
  EXPECT_EQ(face_corner_count(TreeClass::pyramid, 4), 4);
  EXPECT_THROW(face_corner_count(TreeClass::quad, 4), RangeError);
}

TEST(TreeClass, NamesRoundTrip) {
  for (int i = 0; i < kNumTreeClasses; ++i) {
    const auto c = static_cast<TreeClass>(i);
    EXPECT_EQ(tree_class_from_string(to_string(c)), c);
  }
  EXPECT_FALSE(tree_class_from_string("cube").has_value());
}

TEST(Orientation, Examples) {
  EXPECT_EQ(compute_orientation(TreeClass::quad, 0, TreeClass::quad, 2, 1, 1), 1);
  // f > f' picks xi'
  EXPECT_EQ(compute_orientation(TreeClass::hex, 3, TreeClass::hex, 1, 0, 2), 2);
  // hex < prism regardless of face numbers
  EXPECT_EQ(compute_orientation(TreeClass::hex, 5, TreeClass::prism, 0, 3, 1), 3);
  EXPECT_EQ(compute_orientation(TreeClass::prism, 0, TreeClass::hex, 5, 1, 3), 3);
}

TEST(Orientation, FaceMismatch) {
  try {
    compute_orientation(TreeClass::hex, 0, TreeClass::prism, 3, 0, 0);
    FAIL() << "expected face mismatch";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "face mismatch");
  }
  EXPECT_THROW(compute_orientation(TreeClass::quad, 0, TreeClass::quad, 1, 2, 0), RangeError);
}

TEST(Orientation, SemiorderIsStrict) {
  EXPECT_TRUE(class_less(TreeClass::hex, TreeClass::prism));
  EXPECT_TRUE(class_less(TreeClass::tet, TreeClass::prism));
  EXPECT_TRUE(class_less(TreeClass::prism, TreeClass::pyramid));
  EXPECT_TRUE(class_less(TreeClass::hex, TreeClass::pyramid));
  EXPECT_FALSE(class_less(TreeClass::prism, TreeClass::hex));
  EXPECT_FALSE(class_less(TreeClass::hex, TreeClass::tet));
  EXPECT_FALSE(class_less(TreeClass::tet, TreeClass::hex));
  for (int i = 0; i < kNumTreeClasses; ++i) {
    const auto c = static_cast<TreeClass>(i);
    EXPECT_FALSE(class_less(c, c));
  }
}

namespace {

// Corner bijections of a face that are symmetries of the face polygon.
// Quad face corners use z-order (corner = x + 2y).
std::vector<std::vector<int>> face_symmetries(int corners) {
  std::vector<std::vector<int>> out;
  if (corners == 4) {
    for (int swap = 0; swap < 2; ++swap) {
      for (int fx = 0; fx < 2; ++fx) {
        for (int fy = 0; fy < 2; ++fy) {
          std::vector<int> m(4);
          for (int c = 0; c < 4; ++c) {
            int x = c & 1, y = c >> 1;
            if (swap) std::swap(x, y);
            m[c] = (x ^ fx) + 2 * (y ^ fy);
          }
          out.push_back(m);
        }
      }
    }
  } else {
    std::vector<int> m(corners);
    std::iota(m.begin(), m.end(), 0);
    do out.push_back(m);
    while (std::next_permutation(m.begin(), m.end()));
  }
  return out;
}

bool involution(const std::vector<int>& m) {
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (m[m[c]] != static_cast<int>(c)) return false;
  }
  return true;
}

}  // namespace

// Evaluating a connection from either tree gives the same orientation. A
// face glued to the same face number of the same class must reverse the
// face orientation (the trees would otherwise be mirror images), so there
// only involutive corner maps occur.
TEST(Orientation, SameValueFromBothSides) {
  const std::vector<std::pair<TreeClass, TreeClass>> pairs = {
      {TreeClass::line, TreeClass::line},     {TreeClass::quad, TreeClass::quad},
      {TreeClass::quad, TreeClass::triangle}, {TreeClass::triangle, TreeClass::triangle},
      {TreeClass::hex, TreeClass::hex},       {TreeClass::tet, TreeClass::tet},
      {TreeClass::prism, TreeClass::prism},   {TreeClass::pyramid, TreeClass::pyramid},
      {TreeClass::hex, TreeClass::prism},     {TreeClass::tet, TreeClass::prism},
      {TreeClass::prism, TreeClass::pyramid}, {TreeClass::hex, TreeClass::pyramid},
      {TreeClass::tet, TreeClass::pyramid}};
  int checked = 0;
  for (auto [a, b] : pairs) {
    for (int f = 0; f < num_faces(a); ++f) {
      for (int fp = 0; fp < num_faces(b); ++fp) {
        const int corners = face_corner_count(a, f);
        if (corners != face_corner_count(b, fp)) continue;
        for (const auto& m : face_symmetries(corners)) {
          if (a == b && f == fp && !involution(m)) continue;
          const int xi = m[0];
          const int xi_prime = static_cast<int>(std::find(m.begin(), m.end(), 0) - m.begin());
          const int from_a = compute_orientation(a, f, b, fp, xi, xi_prime);
          const int from_b = compute_orientation(b, fp, a, f, xi_prime, xi);
          ASSERT_EQ(from_a, from_b) << to_string(a) << ' ' << f << " / " << to_string(b) << ' '
                                    << fp;
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(FaceCode, Examples) {
  EXPECT_EQ(FaceCode::encode(0, 3, 3).value(), 3);
  EXPECT_EQ(FaceCode::encode(2, 1, 3).value(), 13);
  EXPECT_EQ(FaceCode::encode(3, 2, 2).value(), 14);
  EXPECT_THROW(FaceCode::encode(0, 6, 3), RangeError);
  EXPECT_THROW(FaceCode::encode(0, 4, 2), RangeError);
}

TEST(FaceCode, RoundTripBothDimensions) {
  for (int dim = 2; dim <= 3; ++dim) {
    for (int o = 0; o < 4; ++o) {
      for (int f = 0; f < max_faces(dim); ++f) {
        const auto code = FaceCode::encode(o, f, dim);
        EXPECT_EQ(decode_face(code, dim), (DecodedFace{o, f}));
      }
    }
  }
}
