#pragma once

#include <functional>
#include <vector>

#include "chiralq/model.hpp"
#include "chiralq/prep.hpp"

namespace chiralq {

struct PolarizationVector {
  Vec5 p = Vec5::Zero();

  double operator[](int i) const { return p[i]; }
  double& operator[](int i) { return p[i]; }
};

// <psi| gamma_j |psi> for j = 0..4.
PolarizationVector polarization(const State& psi);

// Throws ValidationError if |psi| deviates from 1 by more than 1e-9.
void require_normalized(const State& psi);

// U(t) = cos(Et) - i sin(Et) H/E; identity when E = 0.
State evolve_state(const HVector& h, const State& init, double t);

PolarizationVector evolve_polarization(const Vec3& k, const ModelParams& p,
                                       const State& init, double t);

// Same contract through eigendecomposition of the dense 4x4 Hamiltonian.
PolarizationVector dense_evolution_oracle(const Vec3& k, const ModelParams& p,
                                          const State& init, double t);

struct TimeAverage {
  PolarizationVector value;
  bool gap_closed = false;  // E = 0: value holds the instantaneous polarization
};

// Infinite-time average via the band projectors P_+- = (1 +- H/E)/2.
TimeAverage time_avg_polarization(const HVector& h, const State& init);
TimeAverage time_avg_polarization(const Vec3& k, const ModelParams& p,
                                  const QuenchSpec& q);

// Measurement backend used by the topology pipelines: the time-averaged
// polarization seen after quench q at momentum k. The exact backend wraps
// time_avg_polarization; the noise module supplies an emulated one.
using AverageFn =
    std::function<PolarizationVector(const Vec3& k, const QuenchSpec& q)>;

AverageFn exact_averager(const ModelParams& p);

enum class TmaxReading {
  kMzOver3T0,   // sin(arccos(m_z / (3 t_0)))
  kThreeMzOverT0  // sin(arccos(3 m_z / t_0)), as printed
};

// 2 / (sqrt(3) t_so sin(arccos(x))); DomainError when |x| >= 1.
double t_max(const ModelParams& p, TmaxReading reading = TmaxReading::kMzOver3T0);

inline constexpr int kDefaultWindowSamples = 64;

struct DephasingModel {
  double rate_fast = 0.0;  // gamma_1, gamma_2 channels
  double rate_slow = 0.0;  // gamma_0, gamma_3, gamma_4 channels
  double t_start = 0.0;
  double t_end = 1.0;

  void validate() const;
  double rate_for(int component) const {
    return (component == 1 || component == 2) ? rate_fast : rate_slow;
  }
};

// n uniform times covering [t_start, t_end] inclusive of both ends.
std::vector<double> window_times(const DephasingModel& d, int n_samples);

// Mean over window_times of (constant part + exp(-rate t) * oscillatory part).
PolarizationVector windowed_avg_polarization(const HVector& h,
                                             const State& init,
                                             const DephasingModel& d,
                                             int n_samples = kDefaultWindowSamples);
PolarizationVector windowed_avg_polarization(const Vec3& k,
                                             const ModelParams& p,
                                             const QuenchSpec& q,
                                             const DephasingModel& d,
                                             int n_samples = kDefaultWindowSamples);

// Time-averaged polarization component decomposition used by the
// windowed average and by noise emulation: <gamma_j(t)> = c_j + a_j cos(2Et)
// + b_j sin(2Et).
struct OscillationParts {
  Vec5 constant = Vec5::Zero();
  Vec5 cos_part = Vec5::Zero();
  Vec5 sin_part = Vec5::Zero();
  double frequency = 0.0;  // 2E
};

OscillationParts oscillation_parts(const HVector& h, const State& init);

}  // namespace chiralq
