#include "cmeshpart/connectivity.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace cmeshpart {

bool GlobalMesh::is_boundary(GlobalIndex k, int face) const {
  const auto& t = trees.at(static_cast<std::size_t>(k));
  return t.neighbors.at(face) == k && t.faces.at(face).neighbor_face(dim) == face;
}

GlobalIndex add_tree(GlobalMesh& mesh, TreeClass eclass, TreeData data) {
  if (dimension(eclass) != mesh.dim) {
    throw std::invalid_argument("tree class " + std::string(to_string(eclass)) +
                                " does not match mesh dimension");
  }
  const GlobalIndex k = mesh.num_trees();
  GlobalTree t;
  t.eclass = eclass;
  const int nf = num_faces(eclass);
  t.neighbors.assign(nf, k);
  t.faces.reserve(nf);
  for (int i = 0; i < nf; ++i) t.faces.push_back(FaceCode::encode(0, i, mesh.dim));
  t.data = std::move(data);
  mesh.trees.push_back(std::move(t));
  return k;
}

void glue_faces(GlobalMesh& mesh, GlobalIndex a, int f, GlobalIndex b, int f_prime,
                int orientation) {
  auto& ta = mesh.trees.at(static_cast<std::size_t>(a));
  auto& tb = mesh.trees.at(static_cast<std::size_t>(b));
  if (face_corner_count(ta.eclass, f) != face_corner_count(tb.eclass, f_prime)) {
    throw std::invalid_argument("face mismatch");
  }
  if (a == b && f == f_prime) {
    throw std::invalid_argument("a face cannot be glued to itself");
  }
  ta.neighbors.at(f) = b;
  ta.faces.at(f) = FaceCode::encode(orientation, f_prime, mesh.dim);
  tb.neighbors.at(f_prime) = a;
  tb.faces.at(f_prime) = FaceCode::encode(orientation, f, mesh.dim);
}

std::vector<Violation> validate_global_connectivity(const GlobalMesh& mesh) {
  std::vector<Violation> out;
  const GlobalIndex K = mesh.num_trees();
  const int dim = mesh.dim;
  auto report = [&](GlobalIndex k, int face, GlobalIndex other, std::string what) {
    out.push_back({k, face, other, std::move(what)});
  };
  std::set<std::pair<GlobalIndex, int>> implicated;

  for (GlobalIndex k = 0; k < K; ++k) {
    const auto& t = mesh.trees[k];
    if (dimension(t.eclass) != dim) {
      report(k, -1, -1, "tree dimension differs from mesh dimension");
      continue;
    }
    const int nf = num_faces(t.eclass);
    if (static_cast<int>(t.neighbors.size()) != nf || static_cast<int>(t.faces.size()) != nf) {
      report(k, -1, -1, "face array length differs from face count");
      continue;
    }
    for (int f = 0; f < nf; ++f) {
      const GlobalIndex n = t.neighbors[f];
      const auto code = decode_face(t.faces[f], dim);
      if (n < 0 || n >= K) {
        report(k, f, n, "neighbor index out of range");
        continue;
      }
      if (n == k && code.neighbor_face == f) {
        if (code.orientation != 0) report(k, f, n, "boundary face with nonzero orientation");
        continue;
      }
      const auto& nt = mesh.trees[n];
      if (code.neighbor_face >= num_faces(nt.eclass) ||
          static_cast<int>(nt.neighbors.size()) != num_faces(nt.eclass)) {
        report(k, f, n, "neighbor face out of range");
        continue;
      }
      if (face_corner_count(t.eclass, f) != face_corner_count(nt.eclass, code.neighbor_face)) {
        report(k, f, n, "face mismatch");
        continue;
      }
      if (code.orientation >= face_corner_count(t.eclass, f)) {
        report(k, f, n, "orientation out of range");
        continue;
      }
      // A broken glue shows up on both of its face slots; report it once.
      if (implicated.contains({k, f})) continue;
      const GlobalIndex back = nt.neighbors[code.neighbor_face];
      const auto back_code = decode_face(nt.faces[code.neighbor_face], dim);
      if (back != k || back_code.neighbor_face != f) {
        report(k, f, n, "neighbor does not point back");
      } else if (back_code.orientation != code.orientation) {
        report(k, f, n, "orientation differs between the two sides");
      } else {
        continue;
      }
      implicated.insert({n, code.neighbor_face});
    }
  }
  return out;
}

std::string describe(const Violation& v) {
  std::ostringstream os;
  os << "tree " << v.tree;
  if (v.face >= 0) os << " face " << v.face;
  if (v.other >= 0) os << " (neighbor tree " << v.other << ")";
  os << ": " << v.what;
  return os.str();
}

std::string to_hex(const TreeData& data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (auto b : data) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

TreeData from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw ParseError("odd-length hex string");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParseError(std::string("bad hex digit '") + c + "'");
  };
  TreeData out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

void write_mesh(std::ostream& out, const GlobalMesh& mesh) {
  out << "cmesh v1 dim=" << mesh.dim << " K=" << mesh.num_trees() << '\n';
  for (GlobalIndex k = 0; k < mesh.num_trees(); ++k) {
    const auto& t = mesh.trees[k];
    out << "tree " << k << ' ' << to_string(t.eclass) << " ;";
    for (std::size_t f = 0; f < t.neighbors.size(); ++f) {
      if (mesh.is_boundary(k, static_cast<int>(f)) && t.faces[f].orientation(mesh.dim) == 0) {
        out << " B";
      } else {
        out << ' ' << t.neighbors[f] << ':' << t.faces[f].value();
      }
    }
    out << " ; data=" << to_hex(t.data) << '\n';
  }
}

std::string dump_mesh(const GlobalMesh& mesh) {
  std::ostringstream os;
  write_mesh(os, mesh);
  return os.str();
}

namespace {

template <class T>
T parse_number(std::string_view s, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return value;
}

std::string_view after_prefix(std::string_view tok, std::string_view prefix, std::size_t line) {
  if (!tok.starts_with(prefix)) {
    throw ParseError("line " + std::to_string(line) + ": expected '" + std::string(prefix) +
                     "', got '" + std::string(tok) + "'");
  }
  return tok.substr(prefix.size());
}

}  // namespace

GlobalMesh read_mesh(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError("empty mesh file");
  GlobalMesh mesh;
  GlobalIndex K = 0;
  {
    std::istringstream hs(line);
    std::string magic, version, dim_tok, k_tok, extra;
    if (!(hs >> magic >> version >> dim_tok >> k_tok) || magic != "cmesh" || version != "v1" ||
        (hs >> extra)) {
      throw ParseError("line 1: expected 'cmesh v1 dim=<d> K=<K>'");
    }
    mesh.dim = parse_number<int>(after_prefix(dim_tok, "dim=", 1), 1);
    K = parse_number<GlobalIndex>(after_prefix(k_tok, "K=", 1), 1);
    if (mesh.dim < 0 || mesh.dim > 3 || K < 0) throw ParseError("line 1: header out of range");
  }
  mesh.trees.reserve(static_cast<std::size_t>(K));
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok != "tree") throw ParseError("line " + std::to_string(lineno) + ": expected 'tree'");
    ls >> tok;
    const auto k = parse_number<GlobalIndex>(tok, lineno);
    if (k != mesh.num_trees()) {
      throw ParseError("line " + std::to_string(lineno) + ": trees out of order");
    }
    ls >> tok;
    const auto eclass = tree_class_from_string(tok);
    if (!eclass || dimension(*eclass) != mesh.dim) {
      throw ParseError("line " + std::to_string(lineno) + ": bad tree class '" + tok + "'");
    }
    if (!(ls >> tok) || tok != ";") {
      throw ParseError("line " + std::to_string(lineno) + ": expected ';'");
    }
    GlobalTree t;
    t.eclass = *eclass;
    const int nf = num_faces(*eclass);
    for (int f = 0; f < nf; ++f) {
      if (!(ls >> tok)) throw ParseError("line " + std::to_string(lineno) + ": missing faces");
      if (tok == "B") {
        t.neighbors.push_back(k);
        t.faces.push_back(FaceCode::encode(0, f, mesh.dim));
        continue;
      }
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        throw ParseError("line " + std::to_string(lineno) + ": expected <nbr>:<code>");
      }
      std::string_view sv(tok);
      t.neighbors.push_back(parse_number<GlobalIndex>(sv.substr(0, colon), lineno));
      t.faces.push_back(
          FaceCode::from_raw(parse_number<std::int32_t>(sv.substr(colon + 1), lineno)));
    }
    if (!(ls >> tok) || tok != ";") {
      throw ParseError("line " + std::to_string(lineno) + ": expected ';' after faces");
    }
    if (!(ls >> tok)) throw ParseError("line " + std::to_string(lineno) + ": missing data");
    t.data = from_hex(after_prefix(tok, "data=", lineno));
    if (ls >> tok) throw ParseError("line " + std::to_string(lineno) + ": trailing tokens");
    mesh.trees.push_back(std::move(t));
  }
  if (mesh.num_trees() != K) {
    throw ParseError("expected " + std::to_string(K) + " trees, found " +
                     std::to_string(mesh.num_trees()));
  }
  return mesh;
}

GlobalMesh parse_mesh(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_mesh(in);
}

}  // namespace cmeshpart
