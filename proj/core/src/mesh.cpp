#include "chiralq/mesh.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "chiralq/errors.hpp"
#include "chiralq/numeric.hpp"

namespace chiralq {

Vec3 periodic_delta(const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  return Vec3(wrap_to_bz(d.x()), wrap_to_bz(d.y()), wrap_to_bz(d.z()));
}

Vec3 face_area_vector(const TriMesh& m, std::size_t f) {
  const auto& t = m.faces[f];
  const Vec3& a = m.vertices[t[0]];
  const Vec3 e1 = periodic_delta(a, m.vertices[t[1]]);
  const Vec3 e2 = periodic_delta(a, m.vertices[t[2]]);
  return 0.5 * e1.cross(e2);
}

void compute_vertex_normals(TriMesh& m) {
  m.normals.assign(m.vertices.size(), Vec3::Zero());
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const Vec3 a = face_area_vector(m, f);
    for (int v : m.faces[f]) m.normals[v] += a;
  }
  for (Vec3& n : m.normals) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
}

std::map<Edge, int> edge_face_counts(const TriMesh& m) {
  std::map<Edge, int> counts;
  for (const auto& t : m.faces)
    for (int e = 0; e < 3; ++e) ++counts[make_edge(t[e], t[(e + 1) % 3])];
  return counts;
}

long euler_characteristic(const TriMesh& m) {
  return static_cast<long>(m.vertices.size()) -
         static_cast<long>(edge_face_counts(m).size()) +
         static_cast<long>(m.faces.size());
}

bool is_closed_manifold(const TriMesh& m) {
  for (const auto& [e, c] : edge_face_counts(m))
    if (c != 2) return false;
  return !m.faces.empty();
}

void validate_mesh(const TriMesh& m) {
  const int n = static_cast<int>(m.vertices.size());
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto& t = m.faces[f];
    for (int v : t)
      if (v < 0 || v >= n) {
        std::ostringstream os;
        os << "face " << f << " references vertex " << v << " of " << n;
        throw ValidationError(os.str());
      }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      std::ostringstream os;
      os << "face " << f << " repeats a vertex";
      throw ValidationError(os.str());
    }
  }
}

void write_obj(std::ostream& os, const TriMesh& m) {
  os << "# momentum-space mesh, coordinates in radians\n";
  os << std::setprecision(12);
  for (const Vec3& v : m.vertices)
    os << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Vec3& n : m.normals)
    os << "vn " << n.x() << ' ' << n.y() << ' ' << n.z() << '\n';
  const bool with_normals = m.normals.size() == m.vertices.size();
  for (const auto& t : m.faces) {
    os << 'f';
    for (int v : t) {
      os << ' ' << v + 1;
      if (with_normals) os << "//" << v + 1;
    }
    os << '\n';
  }
}

TriMesh icosphere(int level) {
  if (level < 0) throw ValidationError("icosphere: level must be >= 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : m.vertices) v.normalize();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<Edge, int> mid;
    auto midpoint = [&](int a, int b) {
      const Edge e = make_edge(a, b);
      auto it = mid.find(e);
      if (it != mid.end()) return it->second;
      const int idx = static_cast<int>(m.vertices.size());
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      mid.emplace(e, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({ab, f[1], bc});
      next.push_back({ca, bc, f[2]});
      next.push_back({ab, bc, ca});
    }
    m.faces = std::move(next);
  }
  m.normals = m.vertices;
  return m;
}

}  // namespace chiralq
