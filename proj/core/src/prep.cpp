#include "chiralq/prep.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "chiralq/errors.hpp"

namespace chiralq {

void QuenchSpec::validate() const {
  if (axis < 0 || axis > 3) {
    std::ostringstream os;
    os << "QuenchSpec: axis " << axis << " not in {0,1,2,3}";
    throw ValidationError(os.str());
  }
  if (std::isnan(depth) || !(depth > 0.0))
    throw ValidationError("QuenchSpec: depth must be > 0 or infinite");
}

HVector prequench_h(const Vec3& k, const ModelParams& p, const QuenchSpec& q) {
  if (q.is_deep()) {
    HVector e;
    e[q.axis] = 1.0;
    return e;
  }
  HVector h = h_vector(k, p);
  h[q.axis] += q.depth;
  return h;
}

InitRotation init_rotation(const HVector& h) {
  InitRotation r;
  // the tau block is (h_3, h_4, h_0) . tau; its full length sets the MW angle
  r.theta_mw = std::atan2(std::hypot(h[1], h[2]), std::hypot(h[0], h[3], h[4]));
  r.phi_mw = std::atan2(h[2], h[1]);
  if (h[4] == 0.0) {
    r.theta_rf = std::atan2(h[3], h[0]);
  } else {
    r.theta_rf = std::atan2(std::hypot(h[3], h[4]), h[0]);
    r.phi_rf = std::atan2(h[4], h[3]);
  }
  return r;
}

namespace {

using Spinor = Eigen::Vector2cd;

// exp(-i theta/2 (-sin(phi) s_x + cos(phi) s_y)) applied to |0>
Spinor rotate_up(double theta, double phi) {
  return Spinor(std::cos(theta / 2),
                std::polar(std::sin(theta / 2), phi));
}

Eigen::Matrix2cd rotation2(double theta, double phi) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Eigen::Matrix2cd m;
  m << c, -std::polar(s, -phi), std::polar(s, phi), c;
  return m;
}

Mat4c kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Mat4c m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return m;
}

State product(const Spinor& a, const Spinor& b) {
  return State(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]);
}

PreparedState checked(const State& psi, const HVector& h_pre) {
  const Mat4c H = build_hamiltonian(h_pre);
  const State Hpsi = H * psi;
  const double e = psi.dot(Hpsi).real();
  PreparedState out;
  out.psi = psi;
  out.band_sign = e >= 0.0 ? +1 : -1;
  out.residual = (Hpsi - e * psi).norm();
  if (out.residual > 1e-8 * std::max(1.0, h_pre.energy())) {
    std::ostringstream os;
    os << "init_state: rotated state is not an eigenstate of H_pre (residual "
       << out.residual << ")";
    throw DegenerateError(os.str());
  }
  return out;
}

const std::array<PreparedState, 4>& deep_states() {
  static const std::array<PreparedState, 4> s = [] {
    std::array<PreparedState, 4> out;
    for (int a = 0; a < 4; ++a) {
      HVector e;
      e[a] = 1.0;
      out[a] = prepare_eigenstate(e);
    }
    return out;
  }();
  return s;
}

}  // namespace

Mat4c mw_rotation(const InitRotation& r) {
  return kron(rotation2(r.theta_mw, r.phi_mw), Eigen::Matrix2cd::Identity());
}

Mat4c rf_rotation(const InitRotation& r) {
  return kron(Eigen::Matrix2cd::Identity(), rotation2(r.theta_rf, r.phi_rf));
}

PreparedState prepare_eigenstate(const HVector& h_pre) {
  if (h_pre.energy() == 0.0)
    throw DegenerateError("init_state: pre-quench field vanishes");
  const InitRotation r = init_rotation(h_pre);
  return checked(product(rotate_up(r.theta_mw, r.phi_mw),
                         rotate_up(r.theta_rf, r.phi_rf)),
                 h_pre);
}

PreparedState init_state(const Vec3& k, const ModelParams& p,
                         const QuenchSpec& q) {
  q.validate();
  if (q.is_deep()) return deep_states()[q.axis];
  return prepare_eigenstate(prequench_h(k, p, q));
}

PulseParams compile_pulse(const HVector& h, double A) {
  if (A == 0.0) throw ValidationError("compile_pulse: hyperfine A is zero");
  const double rho = std::hypot(h[3], h[4]);
  const double R = std::hypot(h[0], rho);
  if (R == 0.0)
    throw DegenerateError(
        "compile_pulse: h_0 = h_3 = h_4 = 0 gives alpha = 0");
  PulseParams pp;
  pp.A = A;
  pp.alpha = 2.0 * R / (kPi * std::abs(A));
  pp.omega_mw = std::hypot(h[1], h[2]) / (2.0 * kPi * pp.alpha);
  pp.phi = -std::atan2(h[2], h[1]);
  // The gamma_0/gamma_3 prefactor 2 pi alpha A/4 carries the sign of A;
  // the two-argument branch is chosen so the round trip is exact.
  const double s = A < 0.0 ? -1.0 : 1.0;
  pp.theta = std::atan2(rho, s * h[0]);
  pp.phi_sb = rho == 0.0 ? (A < 0.0 ? kPi : 0.0)
                         : std::atan2(s * h[4], s * h[3]);
  return pp;
}

Mat4c reconstruct_hamiltonian(const PulseParams& pp) {
  const auto& g = gamma_matrices();
  const double ox = pp.omega_mw * std::cos(pp.phi);
  const double oy = -pp.omega_mw * std::sin(pp.phi);
  const double q = pp.A / 4.0;
  const Mat4c Heff = q * std::cos(pp.theta) * g[0] + ox * g[1] + oy * g[2] +
                     q * std::sin(pp.theta) *
                         (std::cos(pp.phi_sb) * g[3] + std::sin(pp.phi_sb) * g[4]);
  return 2.0 * kPi * pp.alpha * Heff;
}

double verify_pulse_roundtrip(const HVector& h, double A) {
  const Mat4c diff = reconstruct_hamiltonian(compile_pulse(h, A)) -
                     build_hamiltonian(h);
  return diff.cwiseAbs().maxCoeff();
}

void write_pulse_table(std::ostream& os, std::span<const Vec3> ks,
                       const ModelParams& p) {
  os << "kx_pi,ky_pi,kz_pi,theta_rad,phi_rad,omega_mw_MHz,alpha,phi_sb_rad\n";
  os << std::setprecision(10);
  for (const Vec3& k : ks) {
    const PulseParams pp = compile_pulse(h_vector(k, p));
    os << k.x() / kPi << ',' << k.y() / kPi << ',' << k.z() / kPi << ','
       << pp.theta << ',' << pp.phi << ',' << pp.omega_mw << ',' << pp.alpha
       << ',' << pp.phi_sb << '\n';
  }
}

}  // namespace chiralq
