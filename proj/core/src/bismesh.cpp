#include "chiralq/bismesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "chiralq/errors.hpp"
#include "chiralq/numeric.hpp"
#include "chiralq/parallel.hpp"

namespace chiralq {

FieldFn average_field(const ModelParams& p, const QuenchSpec& q,
                      const AverageFn& averager) {
  const AverageFn avg = averager ? averager : exact_averager(p);
  return [avg, q](const Vec3& k) { return std::abs(avg(k, q)[0]); };
}

FieldFn grid_field(const ScalarGrid& grid) {
  return [grid](const Vec3& k) { return std::abs(grid.interpolate(k)); };
}

namespace {

bool has_both_signs(const ScalarGrid& g) {
  bool neg = false, pos = false;
  for (double v : g.values) {
    neg |= v < 0.0;
    pos |= v > 0.0;
  }
  return neg && pos;
}

// Unsigned grids: a BIS shows up as values well below the grid maximum.
double unsigned_threshold(const ScalarGrid& g) {
  return 0.5 * *std::max_element(g.values.begin(), g.values.end());
}

void require_inversion(const ScalarGrid& g) {
  if (g.values.empty()) throw ValidationError("empty grid");
  if (g.has_negative()) {
    if (!has_both_signs(g))
      throw BisAbsentError("signed grid never changes sign: no band inversion");
    return;
  }
  const double lo = *std::min_element(g.values.begin(), g.values.end());
  if (!(lo < unsigned_threshold(g)))
    throw BisAbsentError("grid has no pronounced minimum: no band inversion");
}

}  // namespace

TriMesh initial_triangle(const ScalarGrid& grid) {
  require_inversion(grid);
  TriMesh m;
  for (int axis = 0; axis < 3; ++axis) {
    const int n = grid.dims[axis];
    auto line = [&](int i) {
      std::array<int, 3> idx{0, 0, 0};
      idx[axis] = i;
      return std::abs(grid.at(idx[0], idx[1], idx[2]));
    };
    int best = -1;
    for (int i = 1; i + 1 < n; ++i)
      if (line(i) <= line(i - 1) && line(i) <= line(i + 1) &&
          (best < 0 || line(i) < line(best)))
        best = i;
    if (best < 0) {
      std::ostringstream os;
      os << "initial_triangle: no interior minimum along axis " << axis;
      throw BisAbsentError(os.str());
    }
    Vec3 dir = Vec3::Zero();
    dir[axis] = 1.0;
    const auto r = golden_section_minimize(
        [&](double s) { return std::abs(grid.interpolate(grid.origin + s * dir)); },
        (best - 1) * grid.step, (best + 1) * grid.step, 1e-9);
    Vec3 v = grid.origin;
    v[axis] += r.x;
    m.vertices.push_back(v);
  }
  m.faces = {{0, 1, 2}};
  m.flagged.assign(3, 0);
  return m;
}

namespace {

struct Crossing {
  Vec3 k;
  int axis;                 // cube edge direction
  std::array<int, 2> face;  // the two cube faces: 2*axis' + side
};

std::vector<Crossing> edge_crossings(const ScalarGrid& g, const FieldFn& field) {
  const bool signed_grid = has_both_signs(g);
  const double thresh = unsigned_threshold(g);
  std::vector<Crossing> out;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (int sb = 0; sb < 2; ++sb)
      for (int sc = 0; sc < 2; ++sc) {
        std::array<int, 3> idx{};
        idx[b] = sb ? g.dims[b] - 1 : 0;
        idx[c] = sc ? g.dims[c] - 1 : 0;
        const int n = g.dims[a];
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) {
          idx[a] = i;
          v[i] = g.at(idx[0], idx[1], idx[2]);
        }
        idx[a] = 0;
        const Vec3 base = g.point(idx[0], idx[1], idx[2]);
        std::vector<std::pair<int, int>> brackets;
        if (signed_grid) {
          for (int i = 0; i + 1 < n; ++i)
            if ((v[i] < 0.0) != (v[i + 1] < 0.0)) brackets.emplace_back(i, i + 1);
        } else {
          for (int i = 1; i + 1 < n; ++i)
            if (v[i] <= v[i - 1] && v[i] < v[i + 1] && v[i] < thresh)
              brackets.emplace_back(i - 1, i + 1);
        }
        for (auto [lo, hi] : brackets) {
          auto along = [&](double s) {
            Vec3 k = base;
            k[a] += s;
            return k;
          };
          const auto r = golden_section_minimize(
              [&](double s) { return field(along(s)); }, lo * g.step,
              hi * g.step, 1e-10);
          out.push_back({along(r.x), a, {2 * b + sb, 2 * c + sc}});
        }
      }
  }
  return out;
}

std::vector<std::vector<int>> link_cycles(const std::vector<Crossing>& xs) {
  const int n = static_cast<int>(xs.size());
  std::vector<std::vector<int>> nbr(n);
  for (int face = 0; face < 6; ++face) {
    std::vector<int> on;
    for (int i = 0; i < n; ++i)
      if (xs[i].face[0] == face || xs[i].face[1] == face) on.push_back(i);
    if (on.empty()) continue;
    if (on.size() % 2 != 0) {
      std::ostringstream os;
      os << "seed_patch: odd number (" << on.size()
         << ") of BIS crossings on octant face " << face;
      throw DegenerateError(os.str());
    }
    if (on.size() == 2) {
      nbr[on[0]].push_back(on[1]);
      nbr[on[1]].push_back(on[0]);
      continue;
    }
    if (on.size() != 4)
      throw DegenerateError("seed_patch: more than four crossings on a face");
    // saddle face: take the pairing with the shorter total chord length
    auto d = [&](int i, int j) { return (xs[on[i]].k - xs[on[j]].k).norm(); };
    const std::array<std::array<int, 4>, 3> pairings{
        {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
    int best = 0;
    double best_len = 1e300;
    for (int p = 0; p < 3; ++p) {
      const auto& q = pairings[p];
      const double len = d(q[0], q[1]) + d(q[2], q[3]);
      if (len < best_len) {
        best_len = len;
        best = p;
      }
    }
    const auto& q = pairings[best];
    for (int e = 0; e < 4; e += 2) {
      nbr[on[q[e]]].push_back(on[q[e + 1]]);
      nbr[on[q[e + 1]]].push_back(on[q[e]]);
    }
  }
  std::vector<std::vector<int>> cycles;
  std::vector<char> used(n, 0);
  for (int s = 0; s < n; ++s) {
    if (used[s]) continue;
    if (nbr[s].size() != 2)
      throw DegenerateError("seed_patch: crossing not linked to two neighbours");
    std::vector<int> cyc{s};
    used[s] = 1;
    int prev = s, cur = nbr[s][0];
    while (cur != s) {
      if (used[cur] || nbr[cur].size() != 2)
        throw DegenerateError("seed_patch: crossings do not form closed cycles");
      used[cur] = 1;
      cyc.push_back(cur);
      const int next = nbr[cur][0] == prev ? nbr[cur][1] : nbr[cur][0];
      prev = cur;
      cur = next;
    }
    if (cyc.size() < 3) throw DegenerateError("seed_patch: cycle shorter than 3");
    cycles.push_back(std::move(cyc));
  }
  return cycles;
}

}  // namespace

TriMesh seed_patch(const ScalarGrid& grid, const FieldFn& field) {
  require_inversion(grid);
  const std::vector<Crossing> xs = edge_crossings(grid, field);
  if (xs.empty())
    throw BisAbsentError("seed_patch: the BIS does not meet the octant boundary");
  TriMesh m;
  for (const auto& cyc : link_cycles(xs)) {
    const int base = static_cast<int>(m.vertices.size());
    for (int i : cyc) m.vertices.push_back(xs[i].k);
    const int n = static_cast<int>(cyc.size());
    if (n == 3) {
      m.faces.push_back({base, base + 1, base + 2});
      continue;
    }
    Vec3 c = Vec3::Zero(), newell = Vec3::Zero();
    for (int i = 0; i < n; ++i) {
      const Vec3& a = xs[cyc[i]].k;
      const Vec3& b = xs[cyc[(i + 1) % n]].k;
      c += a;
      newell += a.cross(b);
    }
    c /= n;
    double radius = 0.0;
    for (int i : cyc) radius = std::max(radius, (xs[i].k - c).norm());
    if (newell.norm() > 0.0) {
      const Vec3 dir = newell.normalized();
      const auto r = golden_section_minimize(
          [&](double s) { return field(c + s * dir); }, -radius, radius, 1e-10);
      c += r.x * dir;
    }
    const int centre = static_cast<int>(m.vertices.size());
    m.vertices.push_back(c);
    for (int i = 0; i < n; ++i)
      m.faces.push_back({centre, base + i, base + (i + 1) % n});
  }
  m.flagged.assign(m.vertices.size(), 0);
  return m;
}

namespace {

bool on_octant_plane(double x) {
  return std::abs(x) < 1e-12 || std::abs(std::abs(x) - kPi) < 1e-12;
}

struct EdgeResult {
  Vec3 k;
  bool flagged = false;
};

}  // namespace

TriMesh refine(const TriMesh& mesh, const FieldFn& field, int iterations,
               const RefineOptions& opt) {
  validate_mesh(mesh);
  if (iterations < 0) throw ValidationError("refine: iterations must be >= 0");
  TriMesh cur = mesh;
  cur.flagged.resize(cur.vertices.size(), 0);
  for (int it = 0; it < iterations; ++it) {
    const std::size_t nf = cur.faces.size();
    std::vector<Vec3> fn(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      const Vec3 a = face_area_vector(cur, f);
      fn[f] = a.norm() > 0.0 ? a.normalized() : Vec3::Zero();
    }
    std::map<Edge, int> edge_id;
    std::vector<Edge> edges;
    std::vector<Vec3> edge_normal;
    for (std::size_t f = 0; f < nf; ++f)
      for (int e = 0; e < 3; ++e) {
        const Edge key = make_edge(cur.faces[f][e], cur.faces[f][(e + 1) % 3]);
        auto [itr, fresh] = edge_id.emplace(key, static_cast<int>(edges.size()));
        if (fresh) {
          edges.push_back(key);
          edge_normal.push_back(fn[f]);
        } else {
          edge_normal[itr->second] += fn[f];
        }
      }

    std::vector<EdgeResult> res(edges.size());
    parallel_for(edges.size(), [&](std::size_t i) {
      const Vec3& a = cur.vertices[edges[i].first];
      const Vec3& b = cur.vertices[edges[i].second];
      const Vec3 d = periodic_delta(a, b);
      Vec3 mid = a + 0.5 * d;
      Vec3 n = edge_normal[i];
      for (int ax = 0; ax < 3; ++ax)
        if (on_octant_plane(a[ax]) && a[ax] == b[ax]) {
          n[ax] = 0.0;
          mid[ax] = a[ax];
        }
      if (n.norm() < 1e-12) {
        res[i] = {mid, true};
        return;
      }
      n.normalize();
      const double len = d.norm();
      double half = opt.bracket;
      for (int attempt = 0;; ++attempt) {
        const auto r = golden_section_minimize(
            [&](double s) { return field(mid + s * n); }, -half, half,
            opt.tolerance);
        if (!r.at_edge) {
          res[i] = {mid + r.x * n, false};
          return;
        }
        if (attempt >= opt.max_expansions || half >= len) break;
        half = std::min(2.0 * half, std::max(len, opt.bracket));
      }
      res[i] = {mid, true};
    });

    TriMesh next;
    next.vertices = cur.vertices;
    next.flagged = cur.flagged;
    const int base = static_cast<int>(next.vertices.size());
    for (const auto& r : res) {
      next.vertices.push_back(r.k);
      next.flagged.push_back(r.flagged ? 1 : 0);
    }
    next.faces.reserve(4 * nf);
    for (const auto& t : cur.faces) {
      const int ab = base + edge_id.at(make_edge(t[0], t[1]));
      const int bc = base + edge_id.at(make_edge(t[1], t[2]));
      const int ca = base + edge_id.at(make_edge(t[2], t[0]));
      next.faces.push_back({t[0], ab, ca});
      next.faces.push_back({ab, t[1], bc});
      next.faces.push_back({ca, bc, t[2]});
      next.faces.push_back({ab, bc, ca});
    }
    cur = std::move(next);
  }
  cur.normals.clear();
  return cur;
}

void orient_toward_increasing(TriMesh& mesh, const FieldFn& signed_field) {
  long votes = 0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3 c = a + (periodic_delta(a, mesh.vertices[t[1]]) +
                        periodic_delta(a, mesh.vertices[t[2]])) / 3.0;
    const Vec3 av = face_area_vector(mesh, f);
    if (av.norm() == 0.0) continue;
    const Vec3 n = av.normalized();
    const double eps = 1e-4;
    const double diff = signed_field(c + eps * n) - signed_field(c - eps * n);
    votes += diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
  }
  if (votes < 0)
    for (auto& t : mesh.faces) std::swap(t[1], t[2]);
  if (!mesh.normals.empty()) compute_vertex_normals(mesh);
}

namespace {

struct KeyHash {
  std::size_t operator()(const std::array<std::int64_t, 3>& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : k) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

TriMesh reflect_stitch(const TriMesh& octant, double merge_tol) {
  validate_mesh(octant);
  if (!(merge_tol > 0.0)) throw ValidationError("merge_tol must be > 0");
  const double cell = 4.0 * merge_tol;
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<int>, KeyHash> buckets;
  TriMesh out;

  auto quant = [&](const Vec3& v) {
    return std::array<std::int64_t, 3>{std::llround(v.x() / cell),
                                       std::llround(v.y() / cell),
                                       std::llround(v.z() / cell)};
  };
  auto insert = [&](const Vec3& v, bool flag) {
    const auto q = quant(v);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = buckets.find({q[0] + dx, q[1] + dy, q[2] + dz});
          if (it == buckets.end()) continue;
          for (int idx : it->second)
            if ((out.vertices[idx] - v).cwiseAbs().maxCoeff() <= merge_tol) {
              out.flagged[idx] = out.flagged[idx] || flag;
              return idx;
            }
        }
    const int idx = static_cast<int>(out.vertices.size());
    out.vertices.push_back(v);
    out.flagged.push_back(flag ? 1 : 0);
    buckets[q].push_back(idx);
    return idx;
  };

  for (int s = 0; s < 8; ++s) {
    const Vec3 sign((s & 4) ? -1.0 : 1.0, (s & 2) ? -1.0 : 1.0,
                    (s & 1) ? -1.0 : 1.0);
    const bool odd = ((s & 4) != 0) ^ ((s & 2) != 0) ^ ((s & 1) != 0);
    std::vector<int> map(octant.vertices.size());
    for (std::size_t v = 0; v < octant.vertices.size(); ++v) {
      Vec3 w = octant.vertices[v].cwiseProduct(sign);
      for (int a = 0; a < 3; ++a) w[a] = wrap_to_bz(w[a]) + 0.0;
      const bool flag = v < octant.flagged.size() && octant.flagged[v];
      map[v] = insert(w, flag);
    }
    for (const auto& t : octant.faces) {
      std::array<int, 3> f{map[t[0]], map[t[1]], map[t[2]]};
      if (odd) std::swap(f[1], f[2]);
      out.faces.push_back(f);
    }
  }

  std::vector<std::string> seams;
  std::size_t bad = 0;
  for (const auto& t : out.faces)
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      ++bad;
      if (seams.size() < 20) seams.push_back("face collapsed by vertex merge");
    }
  for (const auto& [e, c] : edge_face_counts(out)) {
    if (c == 2) continue;
    ++bad;
    if (seams.size() < 20) {
      const Vec3& a = out.vertices[e.first];
      const Vec3& b = out.vertices[e.second];
      std::ostringstream os;
      os << "edge (" << a.transpose() / kPi << ")pi-(" << b.transpose() / kPi
         << ")pi borders " << c << " faces";
      seams.push_back(os.str());
    }
  }
  if (bad > 0) {
    std::ostringstream os;
    os << "reflect_stitch: " << bad << " non-manifold seam elements";
    throw StitchError(os.str(), std::move(seams));
  }
  compute_vertex_normals(out);
  return out;
}

double bis_residual(const TriMesh& mesh, const ModelParams& p) {
  double r = 0.0;
  for (const Vec3& v : mesh.vertices)
    r = std::max(r, std::abs(h_vector(v, p)[0]));
  return r;
}

double surface_residual(const TriMesh& mesh, const ModelParams& p) {
  double r = bis_residual(mesh, p);
  for (const auto& t : mesh.faces) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3 c = a + (periodic_delta(a, mesh.vertices[t[1]]) +
                        periodic_delta(a, mesh.vertices[t[2]])) / 3.0;
    r = std::max(r, std::abs(h_vector(c, p)[0]));
  }
  return r;
}

BisResult reconstruct_bis(const ModelParams& p, const BisOptions& opt) {
  p.validate();
  opt.quench.validate();
  if (opt.level < 0) throw ValidationError("mesh level must be >= 0");
  BisResult out;
  const ScalarGrid raw = sample_octant(p, opt.quench, opt.grid_step,
                                       GridQuantity::kSignedAverage, opt.averager);
  out.grid = smooth(raw, opt.smooth_width);
  const FieldFn field = opt.source == FieldSource::kExact
                            ? average_field(p, opt.quench, opt.averager)
                            : grid_field(out.grid);
  TriMesh m = opt.triangle_seed ? initial_triangle(out.grid)
                             : seed_patch(out.grid, field);
  if (opt.triangle_seed && opt.source == FieldSource::kExact) {
    // grid-level seeds carry sampling error that refinement never removes
    for (int axis = 0; axis < 3; ++axis) {
      Vec3& v = m.vertices[axis];
      const double lo = std::max(0.0, v[axis] - opt.grid_step);
      const double hi = std::min(kPi, v[axis] + opt.grid_step);
      const Vec3 base = v;
      v[axis] = golden_section_minimize(
                    [&](double s) {
                      Vec3 k = base;
                      k[axis] = s;
                      return field(k);
                    },
                    lo, hi, 1e-12)
                    .x;
    }
  }
  const FieldFn h0 = [&p](const Vec3& k) { return h_vector(k, p)[0]; };
  orient_toward_increasing(m, h0);
  out.level_residuals.push_back(surface_residual(m, p));
  for (int l = 0; l < opt.level; ++l) {
    m = refine(m, field, 1, opt.refine);
    out.level_residuals.push_back(surface_residual(m, p));
  }
  out.octant = m;
  out.mesh = reflect_stitch(m);
  out.max_residual = bis_residual(out.mesh, p);
  out.flagged = static_cast<std::size_t>(
      std::count(out.mesh.flagged.begin(), out.mesh.flagged.end(), 1));
  return out;
}

}  // namespace chiralq
