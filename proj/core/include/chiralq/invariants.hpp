#pragma once

#include <string>
#include <vector>

#include "chiralq/bismesh.hpp"

namespace chiralq {

// Per-vertex unit vectors; components 3 (g, f) or 4 (symmetry-broken g).
// Unused trailing entries of each Vec4 are zero.
struct TextureField {
  int components = 3;
  std::vector<Vec4> vectors;
  std::vector<double> raw_norms;  // slope-vector norm before normalization
  std::vector<int> degenerate;    // vertices with a vanishing slope vector
};

struct ProbeOptions {
  double step = 0.02 * kPi;
  int n_probe = 6;
};

// Slopes of the sampled channels along each vertex normal. `sample` returns
// the channel values at a momentum; points sit at offsets (j - (n-1)/2) step.
using ChannelFn = std::function<Vec4(const Vec3& k)>;
TextureField probe_texture(const TriMesh& mesh, const ChannelFn& sample,
                           int components, const ProbeOptions& opt = {});

// g_i = slope of <gamma_i>_0 (i = 1..3, and 4 when h_4 != 0).
TextureField g_field(const TriMesh& mesh, const ModelParams& p,
                     const ProbeOptions& opt = {},
                     const AverageFn& averager = {});

// f_i = slope of <gamma_0>_i after quenches along gamma_1..3 at depth m_i.
TextureField f_field(const TriMesh& mesh, const ModelParams& p, double depth,
                     const ProbeOptions& opt = {},
                     const AverageFn& averager = {});

// Signed solid angle of the spherical triangle (a, b, c); positive for a
// counter-clockwise triangle seen from outside. Spherical excess with
// two-argument corner angles; the sign comes from a . (b x c).
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c);

struct WindingResult {
  double value = 0.0;
  std::vector<double> face_solid_angles;
  double error_estimate = 0.0;
  std::vector<std::string> warnings;
};

// Sum of face solid angles / 4 pi. Throws IllConditionedError listing faces
// with degenerate or antipodal vertex vectors.
WindingResult winding_W(const TriMesh& mesh, const TextureField& field);

// (1/pi^2) sum_i S_i (phi_3 - sin phi_3 cos phi_3) / 2, phi_3 = arccos of
// the face-mean g_4; S_i from the normalized (g_1, g_2, g_3) part.
WindingResult winding_WSB(const TriMesh& mesh, const TextureField& field4);

// (2n/pi)(arccos m - m sqrt(1 - m^2)); DomainError for |m| >= 1.
double closed_form_WSB(int n, double m);

enum class SlopeMethod {
  kExact,  // central difference with a tiny step: the continuum slope
  kProbe   // the 6-point least-squares probe used on the mesh
};

struct TransitionOptions {
  SlopeMethod method = SlopeMethod::kExact;
  ProbeOptions probe;
  int n_scan = 41;
  double tolerance = 1e-3;
  AverageFn averager;  // empty: exact averages
};

// Point on the BIS along [-1 -1 -1]: k0 = -arccos(m_z / 3 t_0) (1, 1, 1).
Vec3 diagonal_bis_point(const ModelParams& p);

// Raw (unnormalized) f vector at k, using the analytic BIS normal.
Vec3 f_vector(const Vec3& k, const ModelParams& p, double depth,
              const TransitionOptions& opt = {});

// Projection of the raw f(k0) on the unit [-1 -1 -1] direction.
double f_projection(const Vec3& k0, const ModelParams& p, double depth,
                    const TransitionOptions& opt = {});

struct TransitionScan {
  double m_c = 0.0;
  std::vector<double> depths;
  std::vector<double> projections;  // normalized f(k0) . d
};

// Scans [m_lo, m_hi], bisects the first sign change. NotFoundError if none.
TransitionScan transition_scan(const ModelParams& p, double m_lo, double m_hi,
                               const Vec3& k0,
                               const TransitionOptions& opt = {});

}  // namespace chiralq
