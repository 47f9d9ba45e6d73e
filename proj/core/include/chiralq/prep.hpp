#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "chiralq/model.hpp"

namespace chiralq {

// Pre-quench field m_i along gamma_axis; depth = +inf is the deep limit.
struct QuenchSpec {
  int axis = 0;
  double depth = std::numeric_limits<double>::infinity();

  static QuenchSpec deep(int axis) { return {axis, kInf}; }
  static QuenchSpec shallow(int axis, double depth) { return {axis, depth}; }

  bool is_deep() const { return std::isinf(depth); }
  void validate() const;

  static constexpr double kInf = std::numeric_limits<double>::infinity();
};

// h(k) + m_i e_axis. In the deep limit the normalized direction e_axis is
// returned, since only the direction of h_pre fixes the initial state.
HVector prequench_h(const Vec3& k, const ModelParams& p, const QuenchSpec& q);

struct InitRotation {
  double theta_mw = 0.0;
  double phi_mw = 0.0;
  double theta_rf = 0.0;
  double phi_rf = 0.0;  // nonzero only with a gamma_4 component in h_pre
};

InitRotation init_rotation(const HVector& h_pre);
Mat4c mw_rotation(const InitRotation& r);  // electron spin, acts on sigma
Mat4c rf_rotation(const InitRotation& r);  // nuclear spin, acts on tau

struct PreparedState {
  State psi = State::Zero();
  int band_sign = +1;     // sign of <H_pre> on psi
  double residual = 0.0;  // ||(H_pre - <H_pre>) psi||
};

// U_rf U_mw |00>, checked against H_pre. Throws DegenerateError for h_pre = 0.
PreparedState prepare_eigenstate(const HVector& h_pre);
PreparedState init_state(const Vec3& k, const ModelParams& p,
                         const QuenchSpec& q);

inline constexpr double kHyperfineA = -2.16;

struct PulseParams {
  double theta = 0.0;
  double phi = 0.0;
  double omega_mw = 0.0;
  double alpha = 0.0;
  double phi_sb = 0.0;
  double A = kHyperfineA;
};

// Throws DegenerateError when h_0 = h_3 = h_4 = 0 (alpha would vanish).
PulseParams compile_pulse(const HVector& h, double A = kHyperfineA);
Mat4c reconstruct_hamiltonian(const PulseParams& pp);
double verify_pulse_roundtrip(const HVector& h, double A = kHyperfineA);

void write_pulse_table(std::ostream& os, std::span<const Vec3> ks,
                       const ModelParams& p);

}  // namespace chiralq
