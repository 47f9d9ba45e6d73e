#pragma once

#include <array>

#include "chiralq/types.hpp"

namespace chiralq {

// Momentum in the half-open zone [-pi, pi)^3; construction wraps.
class BlochMomentum {
 public:
  BlochMomentum() = default;
  BlochMomentum(double kx, double ky, double kz);
  explicit BlochMomentum(const Vec3& k) : BlochMomentum(k.x(), k.y(), k.z()) {}

  double kx() const { return k_.x(); }
  double ky() const { return k_.y(); }
  double kz() const { return k_.z(); }
  const Vec3& vec() const { return k_; }

 private:
  Vec3 k_ = Vec3::Zero();
};

struct ModelParams {
  double m_z = 1.4;
  double t_0 = 1.0;
  double t_so = 0.2;
  double h_4 = 0.0;

  void validate() const;  // throws ValidationError
};

struct HVector {
  Vec5 h = Vec5::Zero();

  HVector() = default;
  explicit HVector(const Vec5& v) : h(v) {}
  HVector(double h0, double h1, double h2, double h3, double h4) {
    h << h0, h1, h2, h3, h4;
  }

  double operator[](int i) const { return h[i]; }
  double& operator[](int i) { return h[i]; }
  double energy() const { return h.norm(); }
  Vec3 spin_orbit() const { return h.segment<3>(1); }
};

// gamma_0 .. gamma_4 in the sigma (x) tau Kronecker order; basis index
// 2*sigma_bit + tau_bit, so |00> is index 0.
const std::array<Mat4c, 5>& gamma_matrices();

// Evaluates at the raw vector; the h field is 2pi periodic so no wrap
// is needed for probe points that leave the zone.
HVector h_vector(const Vec3& k, const ModelParams& p);
inline HVector h_vector(const BlochMomentum& k, const ModelParams& p) {
  return h_vector(k.vec(), p);
}

// Gradient of h_0 with respect to k.
Vec3 h0_gradient(const Vec3& k, const ModelParams& p);

Mat4c build_hamiltonian(const HVector& h);

// Operator 2-norm of {H(k), gamma_4}.
double chiral_residual(const ModelParams& p, const BlochMomentum& k);

// Phase-region oracle: +1, -2, +1 or 0. Throws GapClosedError on a
// boundary m_z in {+-t_0, +-3 t_0} and ValidationError when h_4 != 0.
int equilibrium_winding(const ModelParams& p);

}  // namespace chiralq
