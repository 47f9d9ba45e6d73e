#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "chiralq/dynamics.hpp"
#include "chiralq/invariants.hpp"

namespace chiralq {

// Mean photon counts of the four basis levels |00>, |01>, |10>, |11> for
// `repetitions` repeated readouts.
struct PhotonCalibration {
  std::array<double, 4> counts{1000.0, 1300.0, 1600.0, 1900.0};
  int repetitions = 10000;

  void validate() const;
  PhotonCalibration scaled(int reps) const;  // counts proportional to reps

  // Uniform draw of each level from [lo, hi], logged by the caller.
  static PhotonCalibration draw(std::uint64_t seed, double lo = 1000.0,
                                double hi = 2000.0, int repetitions = 10000);
};

// Rows: no pulse, MW, RF0, MW + RF0 readout sequences.
Eigen::Matrix4d design_matrix(const PhotonCalibration& cal);
double design_condition(const PhotonCalibration& cal);

// Design matrix times populations. ValidationError unless populations are
// nonnegative and sum to 1 within 1e-9.
Vec4 expected_counts(const Vec4& populations, const PhotonCalibration& cal);

struct PopulationSolve {
  Vec4 populations = Vec4::Zero();  // clipped to [0, 1], renormalized
  Vec4 raw = Vec4::Zero();          // plain linear solve
  double clip_magnitude = 0.0;      // L1 distance moved by the clip
};

// IllConditionedError naming the degenerate calibration when singular.
PopulationSolve solve_populations(const Vec4& counts,
                                  const PhotonCalibration& cal);

// Basis rotation mapping gamma_j to a diagonal readout observable:
// R gamma_j R^dag = sigma_z (x) 1 for j = 1, 2 and sigma_z (x) tau_z otherwise.
const Mat4c& readout_rotation(int component);
double polarization_from_populations(const Vec4& populations, int component);

// Populations of the rotated basis for a pure state or the dephased
// (projector-averaged) mixture.
Vec4 readout_populations(const State& psi, int component);
Vec4 dephased_populations(const HVector& h, const State& init, int component);

// Linear-propagation oracle: Cov = M^-1 diag(counts) M^-T.
Eigen::Matrix4d population_covariance(const Vec4& populations,
                                      const PhotonCalibration& cal);
double polarization_variance(const Vec4& populations, int component,
                             const PhotonCalibration& cal);

enum class CountModel { kNormal, kPoisson };
enum class SignalModel {
  kDephased,  // every time sample reads the projector-averaged state
  kWindowed   // time samples of the evolving state over a window
};

struct NoiseOptions {
  CountModel count_model = CountModel::kNormal;
  bool calibration_noise = true;  // re-measure N_1..N_4 once per trial
  SignalModel signal = SignalModel::kDephased;
  int n_times = kDefaultWindowSamples;
  // window for kWindowed, in units of t_max (see dynamics::t_max)
  double window_start = 0.0;
  double window_end = 1.0;
  TmaxReading tmax_reading = TmaxReading::kMzOver3T0;
};

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

// Emulates one experimental trial: the true calibration, this trial's
// estimate of it, and counting noise on every readout. Each measurement
// draws from its own stream keyed by (trial seed, k, quench, component), so
// results do not depend on call order or thread scheduling.
class ReadoutEmulator {
 public:
  ReadoutEmulator(const ModelParams& p, const PhotonCalibration& truth,
                  const NoiseOptions& opt, std::uint64_t seed);

  const PhotonCalibration& truth() const { return truth_; }
  const PhotonCalibration& estimate() const { return estimate_; }
  std::uint64_t seed() const { return seed_; }

  // Noisy readout of one set of populations; `gen` supplies the noise.
  double read(const Vec4& populations, int component, std::mt19937_64& gen) const;

  // Time average of <gamma_component> as measured (n_times readouts).
  double measure(const Vec3& k, const QuenchSpec& q, int component) const;
  PolarizationVector measure_all(const Vec3& k, const QuenchSpec& q) const;

  AverageFn averager() const;

 private:
  std::uint64_t stream(const Vec3& k, const QuenchSpec& q, int component) const;

  ModelParams p_;
  PhotonCalibration truth_;
  PhotonCalibration estimate_;
  NoiseOptions opt_;
  std::uint64_t seed_;
  Eigen::Matrix4d inv_estimate_;
  double tmax_ = 1.0;
};

struct McReport {
  double mean = 0.0;
  double std = 0.0;
  double median = 0.0;  // robust centre for ratio estimators such as m_c
  int n_trials = 0;
  int n_failed = 0;
  double failure_fraction = 0.0;
  std::uint64_t seed = 0;
  bool insufficient = false;  // fewer than 100 trials or < 2 successes
  std::vector<double> samples;
  std::vector<std::string> failures;
};

// Runs pipeline(trial_seed) for every trial in parallel. A trial that
// throws is excluded and counted.
McReport mc_propagate(const std::function<double(std::uint64_t)>& pipeline,
                      int n_trials, std::uint64_t master_seed);

// One noisy determination of m_c: per depth, the projection of f(k0)
// measured with 6-point probes; a straight line through the projections
// gives the root.
double noisy_transition_estimate(const ModelParams& p, const ReadoutEmulator& em,
                                 const std::vector<double>& depths,
                                 const Vec3& k0, const ProbeOptions& probe = {});

}  // namespace chiralq
