#include "chiralq/model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "chiralq/errors.hpp"
#include "chiralq/numeric.hpp"

namespace chiralq {

BlochMomentum::BlochMomentum(double kx, double ky, double kz)
    : k_(wrap_to_bz(kx), wrap_to_bz(ky), wrap_to_bz(kz)) {}

void ModelParams::validate() const {
  std::ostringstream os;
  if (!(t_0 > 0.0) || !std::isfinite(t_0)) os << "t_0 must be > 0; ";
  if (!(t_so > 0.0) || !std::isfinite(t_so)) os << "t_so must be > 0; ";
  if (!std::isfinite(m_z)) os << "m_z must be finite; ";
  if (!std::isfinite(h_4)) os << "h_4 must be finite; ";
  if (!os.str().empty()) throw ValidationError("ModelParams: " + os.str());
}

namespace {

std::array<Mat4c, 5> make_gammas() {
  using M2 = Eigen::Matrix2cd;
  const cplx I(0.0, 1.0);
  M2 id = M2::Identity();
  M2 sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, -I, I, 0;
  sz << 1, 0, 0, -1;
  auto kron = [](const M2& a, const M2& b) {
    Mat4c m;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return m;
  };
  return {kron(sz, sz), kron(sx, id), kron(sy, id), kron(sz, sx),
          kron(sz, sy)};
}

}  // namespace

const std::array<Mat4c, 5>& gamma_matrices() {
  static const std::array<Mat4c, 5> g = make_gammas();
  return g;
}

HVector h_vector(const Vec3& k, const ModelParams& p) {
  return HVector(p.m_z - p.t_0 * (std::cos(k.x()) + std::cos(k.y()) +
                                  std::cos(k.z())),
                 p.t_so * std::sin(k.x()), p.t_so * std::sin(k.y()),
                 p.t_so * std::sin(k.z()), p.h_4);
}

Vec3 h0_gradient(const Vec3& k, const ModelParams& p) {
  return p.t_0 * Vec3(std::sin(k.x()), std::sin(k.y()), std::sin(k.z()));
}

Mat4c build_hamiltonian(const HVector& h) {
  const auto& g = gamma_matrices();
  Mat4c H = Mat4c::Zero();
  for (int i = 0; i < 5; ++i) H += h[i] * g[i];
  return H;
}

double chiral_residual(const ModelParams& p, const BlochMomentum& k) {
  const Mat4c H = build_hamiltonian(h_vector(k, p));
  const Mat4c& g4 = gamma_matrices()[4];
  const Mat4c A = H * g4 + g4 * H;
  // A is Hermitian, so its 2-norm is the largest |eigenvalue|
  Eigen::SelfAdjointEigenSolver<Mat4c> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

int equilibrium_winding(const ModelParams& p) {
  p.validate();
  if (p.h_4 != 0.0)
    throw ValidationError("equilibrium_winding: requires h_4 = 0");
  const double m = p.m_z / p.t_0;
  const double eps = 1e-12;
  for (double b : {-3.0, -1.0, 1.0, 3.0})
    if (std::abs(m - b) < eps) {
      std::ostringstream os;
      os << "equilibrium_winding: m_z = " << p.m_z
         << " is a phase boundary (bulk gap closes)";
      throw GapClosedError(os.str());
    }
  const double a = std::abs(m);
  if (a < 1.0) return -2;
  if (a < 3.0) return 1;
  return 0;
}

}  // namespace chiralq
