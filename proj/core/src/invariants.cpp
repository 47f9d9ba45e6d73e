#include "chiralq/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chiralq/errors.hpp"
#include "chiralq/numeric.hpp"
#include "chiralq/parallel.hpp"

namespace chiralq {

TextureField probe_texture(const TriMesh& mesh, const ChannelFn& sample,
                           int components, const ProbeOptions& opt) {
  if (components < 1 || components > 4)
    throw ValidationError("probe_texture: components must be 1..4");
  if (opt.n_probe < 2 || !(opt.step > 0.0))
    throw ValidationError("probe_texture: need n_probe >= 2 and step > 0");
  if (mesh.normals.size() != mesh.vertices.size())
    throw ValidationError("probe_texture: mesh has no vertex normals");
  const std::size_t nv = mesh.vertices.size();
  TextureField out;
  out.components = components;
  out.vectors.assign(nv, Vec4::Zero());
  out.raw_norms.assign(nv, 0.0);

  std::vector<double> offs(opt.n_probe);
  for (int j = 0; j < opt.n_probe; ++j)
    offs[j] = (j - 0.5 * (opt.n_probe - 1)) * opt.step;

  parallel_for(nv, [&](std::size_t v) {
    const Vec3& n = mesh.normals[v];
    std::vector<Vec4> vals(opt.n_probe);
    for (int j = 0; j < opt.n_probe; ++j)
      vals[j] = sample(mesh.vertices[v] + offs[j] * n);
    Vec4 slope = Vec4::Zero();
    std::vector<double> y(opt.n_probe);
    for (int c = 0; c < components; ++c) {
      for (int j = 0; j < opt.n_probe; ++j) y[j] = vals[j][c];
      slope[c] = fit_line(offs, y).slope;
    }
    out.raw_norms[v] = slope.norm();
    if (out.raw_norms[v] > 0.0) out.vectors[v] = slope / out.raw_norms[v];
  });
  for (std::size_t v = 0; v < nv; ++v)
    if (!(out.raw_norms[v] > 1e-14)) out.degenerate.push_back(static_cast<int>(v));
  return out;
}

TextureField g_field(const TriMesh& mesh, const ModelParams& p,
                     const ProbeOptions& opt, const AverageFn& averager) {
  p.validate();
  const AverageFn avg = averager ? averager : exact_averager(p);
  const int comps = p.h_4 != 0.0 ? 4 : 3;
  const QuenchSpec q = QuenchSpec::deep(0);
  return probe_texture(
      mesh,
      [&](const Vec3& k) {
        const PolarizationVector pv = avg(k, q);
        return Vec4(pv[1], pv[2], pv[3], comps == 4 ? pv[4] : 0.0);
      },
      comps, opt);
}

TextureField f_field(const TriMesh& mesh, const ModelParams& p, double depth,
                     const ProbeOptions& opt, const AverageFn& averager) {
  p.validate();
  if (std::isnan(depth) || !(depth > 0.0))
    throw ValidationError("f_field: depth must be > 0 or infinite");
  const AverageFn avg = averager ? averager : exact_averager(p);
  return probe_texture(
      mesh,
      [&](const Vec3& k) {
        Vec4 r = Vec4::Zero();
        for (int i = 1; i <= 3; ++i) r[i - 1] = avg(k, {i, depth})[0];
        return r;
      },
      3, opt);
}

double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  auto corner = [](const Vec3& p, const Vec3& q, const Vec3& r) {
    const Vec3 tq = q - p.dot(q) * p;
    const Vec3 tr = r - p.dot(r) * p;
    return std::atan2(tq.cross(tr).norm(), tq.dot(tr));
  };
  const double triple = a.dot(b.cross(c));
  if (triple == 0.0) return 0.0;
  const double excess =
      corner(a, b, c) + corner(b, c, a) + corner(c, a, b) - kPi;
  return triple > 0.0 ? excess : -excess;
}

namespace {

// Splits once when the triangle spans more than a hemisphere, where the
// corner-angle formula loses accuracy.
double face_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  if (1.0 + a.dot(b) + b.dot(c) + c.dot(a) > 0.0) return solid_angle(a, b, c);
  const Vec3 ab = (a + b).normalized(), bc = (b + c).normalized(),
             ca = (c + a).normalized();
  return solid_angle(a, ab, ca) + solid_angle(ab, b, bc) +
         solid_angle(ca, bc, c) + solid_angle(ab, bc, ca);
}

void check_field(const TriMesh& mesh, const TextureField& field, int comps) {
  validate_mesh(mesh);
  if (field.vectors.size() != mesh.vertices.size())
    throw ValidationError("texture field size does not match mesh vertices");
  if (field.components < comps) {
    std::ostringstream os;
    os << "winding needs a " << comps << "-component field, got "
       << field.components;
    throw ValidationError(os.str());
  }
}

constexpr double kAntipodal = 1.0 - 1e-10;

}  // namespace

WindingResult winding_W(const TriMesh& mesh, const TextureField& field) {
  check_field(mesh, field, 3);
  const std::size_t nf = mesh.faces.size();
  WindingResult r;
  r.face_solid_angles.assign(nf, 0.0);
  std::vector<char> bad(nf, 0);
  parallel_for(nf, [&](std::size_t f) {
    std::array<Vec3, 3> g;
    for (int i = 0; i < 3; ++i) {
      const Vec3 v = field.vectors[mesh.faces[f][i]].head<3>();
      const double n = v.norm();
      if (!(n > 1e-12)) {
        bad[f] = 1;
        return;
      }
      g[i] = v / n;
    }
    for (int i = 0; i < 3; ++i)
      if (g[i].dot(g[(i + 1) % 3]) < -kAntipodal) {
        bad[f] = 1;
        return;
      }
    r.face_solid_angles[f] = face_solid_angle(g[0], g[1], g[2]);
  });
  std::vector<int> faces;
  for (std::size_t f = 0; f < nf; ++f)
    if (bad[f]) faces.push_back(static_cast<int>(f));
  if (!faces.empty()) {
    std::ostringstream os;
    os << "winding_W: " << faces.size()
       << " faces with degenerate or antipodal texture vectors";
    throw IllConditionedError(os.str(), std::move(faces));
  }
  r.value = compensated_sum(r.face_solid_angles) / (4.0 * kPi);
  return r;
}

WindingResult winding_WSB(const TriMesh& mesh, const TextureField& field4) {
  check_field(mesh, field4, 4);
  const std::size_t nf = mesh.faces.size();
  WindingResult r;
  r.face_solid_angles.assign(nf, 0.0);
  std::vector<double> weighted(nf, 0.0);
  std::vector<char> pole(nf, 0), bad(nf, 0);
  parallel_for(nf, [&](std::size_t f) {
    std::array<Vec3, 3> g;
    double g4 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Vec4& v = field4.vectors[mesh.faces[f][i]];
      g4 += v[3] / 3.0;
      const double n = v.head<3>().norm();
      if (!(n > 1e-12)) {
        pole[f] = 1;
        return;
      }
      g[i] = v.head<3>() / n;
    }
    for (int i = 0; i < 3; ++i)
      if (g[i].dot(g[(i + 1) % 3]) < -kAntipodal) {
        bad[f] = 1;
        return;
      }
    const double S = face_solid_angle(g[0], g[1], g[2]);
    const double phi3 = std::acos(std::clamp(g4, -1.0, 1.0));
    r.face_solid_angles[f] = S;
    weighted[f] = S * 0.5 * (phi3 - std::sin(phi3) * std::cos(phi3));
  });
  std::vector<int> faces;
  std::size_t poles = 0;
  for (std::size_t f = 0; f < nf; ++f) {
    if (bad[f]) faces.push_back(static_cast<int>(f));
    poles += pole[f];
  }
  if (!faces.empty())
    throw IllConditionedError("winding_WSB: antipodal texture vectors",
                              std::move(faces));
  if (poles > 0) {
    std::ostringstream os;
    os << poles << " faces touch |g_4| = 1; their weight was set to zero";
    r.warnings.push_back(os.str());
  }
  r.value = compensated_sum(weighted) / (kPi * kPi);
  return r;
}

double closed_form_WSB(int n, double m) {
  if (!(std::abs(m) < 1.0)) {
    std::ostringstream os;
    os << "closed_form_WSB: |m| = " << std::abs(m) << " must be < 1";
    throw DomainError(os.str());
  }
  return 2.0 * n / kPi * (std::acos(m) - m * std::sqrt(1.0 - m * m));
}

Vec3 diagonal_bis_point(const ModelParams& p) {
  p.validate();
  const double x = p.m_z / (3.0 * p.t_0);
  if (!(std::abs(x) < 1.0))
    throw BisAbsentError("no BIS point on the [111] diagonal for this m_z");
  const double a = std::acos(x);
  return Vec3(-a, -a, -a);
}

Vec3 f_vector(const Vec3& k, const ModelParams& p, double depth,
              const TransitionOptions& opt) {
  const AverageFn avg = opt.averager ? opt.averager : exact_averager(p);
  const Vec3 grad = h0_gradient(k, p);
  if (grad.norm() == 0.0) throw DegenerateError("f_vector: h_0 gradient vanishes");
  const Vec3 n = grad.normalized();
  Vec3 f;
  for (int i = 1; i <= 3; ++i) {
    const QuenchSpec q{i, depth};
    auto at = [&](double s) { return avg(k + s * n, q)[0]; };
    if (opt.method == SlopeMethod::kExact) {
      const double h = 1e-5;
      f[i - 1] = (at(h) - at(-h)) / (2.0 * h);
    } else {
      const int np = opt.probe.n_probe;
      std::vector<double> x(np), y(np);
      for (int j = 0; j < np; ++j) {
        x[j] = (j - 0.5 * (np - 1)) * opt.probe.step;
        y[j] = at(x[j]);
      }
      f[i - 1] = fit_line(x, y).slope;
    }
  }
  return f;
}

double f_projection(const Vec3& k0, const ModelParams& p, double depth,
                    const TransitionOptions& opt) {
  return f_vector(k0, p, depth, opt).dot(Vec3(-1, -1, -1).normalized());
}

TransitionScan transition_scan(const ModelParams& p, double m_lo, double m_hi,
                               const Vec3& k0, const TransitionOptions& opt) {
  p.validate();
  if (!(m_lo > 0.0) || !(m_hi > m_lo))
    throw ValidationError("transition_scan: need 0 < m_lo < m_hi");
  if (opt.n_scan < 2) throw ValidationError("transition_scan: n_scan >= 2");
  TransitionScan out;
  const Vec3 d = Vec3(-1, -1, -1).normalized();
  std::vector<double> raw(opt.n_scan);
  out.depths.resize(opt.n_scan);
  out.projections.resize(opt.n_scan);
  parallel_for(opt.n_scan, [&](std::size_t i) {
    const double m = m_lo + (m_hi - m_lo) * i / (opt.n_scan - 1);
    const Vec3 f = f_vector(k0, p, m, opt);
    out.depths[i] = m;
    raw[i] = f.dot(d);
    out.projections[i] = f.norm() > 0.0 ? raw[i] / f.norm() : 0.0;
  });
  for (int i = 0; i + 1 < opt.n_scan; ++i) {
    if ((raw[i] > 0.0) == (raw[i + 1] > 0.0) && raw[i] != 0.0) continue;
    out.m_c = bisect_root(
        [&](double m) { return f_projection(k0, p, m, opt); }, out.depths[i],
        out.depths[i + 1], opt.tolerance);
    return out;
  }
  std::ostringstream os;
  os << "transition_scan: f(k0) projection keeps its sign on [" << m_lo << ", "
     << m_hi << "]";
  throw NotFoundError(os.str());
}

}  // namespace chiralq
