#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "chiralq/bismesh.hpp"
#include "chiralq/errors.hpp"
#include "chiralq/invariants.hpp"
#include "test_support.hpp"

using namespace chiralq;

namespace {

ModelParams with_mz(double m, double t_so = 0.2) {
  ModelParams p;
  p.m_z = m;
  p.t_so = t_so;
  return p;
}

// Unit sphere texture with azimuth wound n times: degree n.
TextureField wound_sphere(const TriMesh& m, int n, double g4 = 0.0) {
  TextureField f;
  f.components = g4 == 0.0 ? 3 : 4;
  const double r = std::sqrt(1.0 - g4 * g4);
  for (const Vec3& v : m.vertices) {
    const double th = std::acos(std::clamp(v.z(), -1.0, 1.0));
    const double ph = n * std::atan2(v.y(), v.x());
    f.vectors.emplace_back(r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph),
                           r * std::cos(th), g4);
    f.raw_norms.push_back(1.0);
  }
  return f;
}

TriMesh bis(double m, int level = 4, double t_so = 0.2) {
  BisOptions o;
  o.level = level;
  return reconstruct_bis(with_mz(m, t_so), o).mesh;
}

}  // namespace

TEST(SolidAngle, OctantIsEighthOfSphere) {
  EXPECT_NEAR(solid_angle(Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()), kPi / 2, 1e-14);
  EXPECT_NEAR(solid_angle(Vec3::UnitX(), Vec3::UnitZ(), Vec3::UnitY()), -kPi / 2, 1e-14);
  EXPECT_EQ(solid_angle(Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitY()), 0.0);
}

TEST(SolidAngle, MatchesVanOosterom) {
  std::mt19937_64 gen(61);
  std::normal_distribution<double> n;
  for (int i = 0; i < 1000; ++i) {
    Vec3 a(n(gen), n(gen), n(gen)), b(n(gen), n(gen), n(gen)), c(n(gen), n(gen), n(gen));
    a.normalize();
    b.normalize();
    c.normalize();
    const double num = a.dot(b.cross(c));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    EXPECT_NEAR(solid_angle(a, b, c), 2.0 * std::atan2(num, den), 1e-9);
  }
}

TEST(SolidAngle, AdditiveUnderSubdivision) {
  std::mt19937_64 gen(62);
  std::normal_distribution<double> n;
  for (int i = 0; i < 1000; ++i) {
    Vec3 a(n(gen), n(gen), n(gen)), b(n(gen), n(gen), n(gen)), c(n(gen), n(gen), n(gen));
    a.normalize();
    b.normalize();
    c.normalize();
    const Vec3 ab = (a + b).normalized(), bc = (b + c).normalized(), ca = (c + a).normalized();
    const double whole = solid_angle(a, b, c);
    const double parts = solid_angle(a, ab, ca) + solid_angle(ab, b, bc) +
                         solid_angle(ca, bc, c) + solid_angle(ab, bc, ca);
    EXPECT_NEAR(whole, parts, 1e-8);
  }
}

TEST(Winding, IdentityTextureOnSphere) {
  const TriMesh m = icosphere(3);
  EXPECT_NEAR(winding_W(m, wound_sphere(m, 1)).value, 1.0, 1e-10);
  TriMesh r = m;
  for (auto& f : r.faces) std::swap(f[1], f[2]);
  EXPECT_NEAR(winding_W(r, wound_sphere(m, 1)).value, -1.0, 1e-10);
  EXPECT_NEAR(winding_W(m, wound_sphere(m, -2)).value, -2.0, 1e-6);
}

TEST(Winding, ConstantFieldIsZero) {
  const TriMesh m = icosphere(2);
  TextureField f;
  f.vectors.assign(m.vertex_count(), Vec4(0.6, 0.0, 0.8, 0.0));
  f.raw_norms.assign(m.vertex_count(), 1.0);
  EXPECT_EQ(winding_W(m, f).value, 0.0);
}

TEST(Winding, AntipodalFaceIsIllConditioned) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.faces = {{0, 1, 2}};
  TextureField f;
  f.vectors = {Vec4(1, 0, 0, 0), Vec4(-1, 0, 0, 0), Vec4(0, 1, 0, 0)};
  f.raw_norms = {1, 1, 1};
  EXPECT_THROW(winding_W(m, f), IllConditionedError);
}

TEST(Winding, PhaseRegionsAtLevelFive) {
  for (auto [m, nu] : {std::pair{1.4, 1}, {0.0, -2}, {-1.4, 1}}) {
    const TriMesh mesh = bis(m, 5);
    const double w = winding_W(mesh, g_field(mesh, with_mz(m))).value;
    EXPECT_NEAR(w, nu, 0.05) << m;
  }
}

TEST(Winding, ConvergesWithRefinement) {
  double prev = 1.0;
  for (int level = 2; level <= 5; ++level) {
    const TriMesh mesh = bis(1.4, level);
    const double err = std::abs(winding_W(mesh, g_field(mesh, with_mz(1.4))).value - 1.0);
    EXPECT_LE(err, prev + 1e-12) << level;
    prev = err;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(Texture, GFieldFollowsSpinOrbitDirection) {
  const ModelParams p = with_mz(1.4);
  BisOptions o;
  o.level = 3;
  const TriMesh mesh = reconstruct_bis(p, o).mesh;
  const TextureField g = g_field(mesh, p);
  EXPECT_EQ(g.components, 3);
  const double cos2 = std::cos(2.0 * kPi / 180.0);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const HVector h = h_vector(mesh.vertices[v], p);
    // normals point toward increasing h_0, so the slope of h_0 h_i / E^2
    // is +h_i: outward along the diagonal, as the transition scan expects
    const Vec3 so = Vec3(h[1], h[2], h[3]).normalized();
    EXPECT_GT(g.vectors[v].head<3>().dot(so), cos2) << v;
    EXPECT_EQ(g.vectors[v][3], 0.0);
  }
}

TEST(Texture, ProbeRecoversLinearSlope) {
  TriMesh m;
  m.vertices = {Vec3(0.1, 0.2, 0.3)};
  m.normals = {Vec3(0, 0, 1)};
  const ChannelFn lin = [](const Vec3& k) { return Vec4(3.0 * k.z() + 1.0, -k.z(), 0.5, 0.0); };
  const TextureField f = probe_texture(m, lin, 3);
  EXPECT_NEAR(f.raw_norms[0], std::sqrt(10.0), 1e-9);
  EXPECT_NEAR(f.vectors[0][0], 3.0 / std::sqrt(10.0), 1e-12);
  EXPECT_NEAR(f.vectors[0][1], -1.0 / std::sqrt(10.0), 1e-12);
  EXPECT_NEAR(f.vectors[0][2], 0.0, 1e-12);
}

TEST(Texture, DeepFEqualsG) {
  const ModelParams p = with_mz(1.4);
  const TriMesh mesh = bis(1.4, 3);
  const TextureField g = g_field(mesh, p);
  const TextureField f = f_field(mesh, p, QuenchSpec::kInf);
  const TextureField f100 = f_field(mesh, p, 100.0);
  const double cos05 = std::cos(0.5 * kPi / 180.0);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    EXPECT_LT((f.vectors[v] - g.vectors[v]).norm(), 1e-6);
    EXPECT_GT(f100.vectors[v].dot(g.vectors[v]), cos05);
  }
}

TEST(Texture, FWindingChangesAcrossTransition) {
  const ModelParams p = with_mz(1.4, 1.0);
  const TriMesh mesh = bis(1.4, 4, 1.0);
  EXPECT_NEAR(winding_W(mesh, f_field(mesh, p, 4.0)).value, 1.0, 0.1);
  EXPECT_NEAR(winding_W(mesh, f_field(mesh, p, 2.0)).value, 0.0, 0.1);
}

TEST(WindingSB, ClosedFormValues) {
  EXPECT_NEAR(closed_form_WSB(1, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(closed_form_WSB(1, 0.5), 0.391, 5e-4);
  EXPECT_NEAR(closed_form_WSB(-2, 0.0), -2.0, 1e-15);
  EXPECT_THROW(closed_form_WSB(1, 1.0), DomainError);
  EXPECT_THROW(closed_form_WSB(1, -1.2), DomainError);
}

TEST(WindingSB, UniformG4MatchesClosedForm) {
  const TriMesh m = icosphere(4);
  for (int n : {1, -2})
    for (double g4 : {0.1, 0.3, 0.5, 0.7}) {
      const double w = winding_WSB(m, wound_sphere(m, n, g4)).value;
      const double c = closed_form_WSB(n, g4);
      EXPECT_NEAR(w / c, 1.0, 0.02) << n << " " << g4;
    }
}

TEST(WindingSB, EquatorReducesToW) {
  const ModelParams p = with_mz(1.4);
  const TriMesh mesh = bis(1.4, 3);
  TextureField g = g_field(mesh, p);
  const double w = winding_W(mesh, g).value;
  g.components = 4;
  EXPECT_NEAR(winding_WSB(mesh, g).value, w, 1e-12);
}

TEST(WindingSB, DecreasesWithSymmetryBreaking) {
  const TriMesh mesh = bis(1.4, 4);
  double prev = 2.0;
  for (double h4 : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    ModelParams p = with_mz(1.4);
    p.h_4 = h4;
    const TextureField g = g_field(mesh, p);
    const double w = h4 == 0.0 ? winding_W(mesh, g).value : winding_WSB(mesh, g).value;
    EXPECT_LT(std::abs(w), prev) << h4;
    if (h4 > 0.0) EXPECT_GT(std::abs(w - std::round(w)), 0.01) << h4;
    prev = std::abs(w);
  }
}

TEST(Transition, DiagonalBisPoint) {
  const Vec3 k0 = diagonal_bis_point(with_mz(1.4, 1.0));
  EXPECT_NEAR(k0.x(), -1.084, 2e-3);
  EXPECT_EQ(k0.x(), k0.y());
  EXPECT_EQ(k0.y(), k0.z());
}

TEST(Transition, CriticalDepth) {
  const ModelParams p = with_mz(1.4, 1.0);
  const Vec3 k0 = diagonal_bis_point(p);
  const TransitionScan s = transition_scan(p, 2.0, 4.0, k0);
  EXPECT_NEAR(s.m_c, 2.653, 0.02);
  EXPECT_EQ(s.depths.size(), s.projections.size());
  EXPECT_GT(f_projection(k0, p, QuenchSpec::kInf), 0.0);

  TransitionOptions probe;
  probe.method = SlopeMethod::kProbe;
  EXPECT_NEAR(transition_scan(p, 2.0, 4.0, k0, probe).m_c, 2.653, 0.06);
  EXPECT_THROW(transition_scan(p, 3.0, 4.0, k0), NotFoundError);
}
