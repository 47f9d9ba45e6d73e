#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "chiralq/types.hpp"

namespace chiralq {

// Triangulated surface in momentum space. Vertices of a stitched BIS are
// wrapped into [-pi, pi)^3; edge vectors always use the minimum image, so
// faces may straddle the zone boundary.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> normals;           // unit, per vertex
  std::vector<std::uint8_t> flagged;   // refine could not bracket a minimum

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
};

using Edge = std::pair<int, int>;  // (min, max)

inline Edge make_edge(int a, int b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

// b - a with each component reduced to [-pi, pi).
Vec3 periodic_delta(const Vec3& a, const Vec3& b);

// Area vector (half the cross product) using minimum-image edges.
Vec3 face_area_vector(const TriMesh& m, std::size_t f);

// Area-weighted vertex normals; fills m.normals.
void compute_vertex_normals(TriMesh& m);

std::map<Edge, int> edge_face_counts(const TriMesh& m);
long euler_characteristic(const TriMesh& m);
bool is_closed_manifold(const TriMesh& m);

// Throws ValidationError on out-of-range or repeated face indices.
void validate_mesh(const TriMesh& m);

void write_obj(std::ostream& os, const TriMesh& m);

// Unit icosphere with outward-oriented faces; level 0 is the icosahedron,
// level L has 20 * 4^L faces.
TriMesh icosphere(int level);

}  // namespace chiralq
