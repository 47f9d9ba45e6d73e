#include "chiralq/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "chiralq/errors.hpp"
#include "chiralq/numeric.hpp"
#include "chiralq/parallel.hpp"

namespace chiralq {

void PhotonCalibration::validate() const {
  for (int i = 0; i < 4; ++i)
    if (!(counts[i] > 0.0) || !std::isfinite(counts[i])) {
      std::ostringstream os;
      os << "PhotonCalibration: N_" << i + 1 << " = " << counts[i]
         << " must be positive";
      throw ValidationError(os.str());
    }
  if (repetitions < 1)
    throw ValidationError("PhotonCalibration: repetitions must be >= 1");
}

PhotonCalibration PhotonCalibration::scaled(int reps) const {
  validate();
  if (reps < 1) throw ValidationError("scaled: repetitions must be >= 1");
  PhotonCalibration c = *this;
  for (double& n : c.counts) n *= static_cast<double>(reps) / repetitions;
  c.repetitions = reps;
  return c;
}

PhotonCalibration PhotonCalibration::draw(std::uint64_t seed, double lo,
                                          double hi, int repetitions) {
  if (!(lo > 0.0) || !(hi >= lo))
    throw ValidationError("PhotonCalibration::draw: need 0 < lo <= hi");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  PhotonCalibration c;
  for (double& n : c.counts) n = u(gen);
  c.repetitions = repetitions;
  return c;
}

Eigen::Matrix4d design_matrix(const PhotonCalibration& cal) {
  const auto& N = cal.counts;
  Eigen::Matrix4d M;
  M << N[0], N[1], N[2], N[3],
       N[2], N[3], N[0], N[1],
       N[1], N[0], N[2], N[3],
       N[2], N[3], N[1], N[0];
  return M;
}

double design_condition(const PhotonCalibration& cal) {
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(design_matrix(cal));
  const auto& s = svd.singularValues();
  return s[3] == 0.0 ? std::numeric_limits<double>::infinity() : s[0] / s[3];
}

Vec4 expected_counts(const Vec4& populations, const PhotonCalibration& cal) {
  cal.validate();
  if ((populations.array() < -1e-12).any() ||
      std::abs(populations.sum() - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "expected_counts: populations must be >= 0 and sum to 1 (sum = "
       << populations.sum() << ")";
    throw ValidationError(os.str());
  }
  return design_matrix(cal) * populations;
}

namespace {

void require_invertible(const PhotonCalibration& cal) {
  const double cond = design_condition(cal);
  if (cond < 1e12) return;
  const auto& N = cal.counts;
  std::ostringstream os;
  os << "readout design matrix is singular (condition " << cond << ")";
  if (std::abs(N[0] - N[1]) <= 1e-9 * N[0]) os << "; N_1 = N_2";
  if (std::abs(N[0] + N[1] - N[2] - N[3]) <= 1e-9 * (N[0] + N[1]))
    os << "; N_1 + N_2 = N_3 + N_4";
  throw IllConditionedError(os.str(), {});
}

PopulationSolve clip(const Vec4& raw) {
  PopulationSolve s;
  s.raw = raw;
  Vec4 c = raw.cwiseMax(0.0).cwiseMin(1.0);
  const double sum = c.sum();
  c = sum > 0.0 ? Vec4(c / sum) : Vec4::Constant(0.25);
  s.populations = c;
  s.clip_magnitude = (c - raw).cwiseAbs().sum();
  return s;
}

Vec4 weights(int component) {
  return (component == 1 || component == 2) ? Vec4(1, 1, -1, -1)
                                            : Vec4(1, -1, -1, 1);
}

std::array<Mat4c, 5> make_rotations() {
  const double r = std::sqrt(0.5);
  const cplx I(0.0, 1.0);
  using M2 = Eigen::Matrix2cd;
  M2 id = M2::Identity(), sx, sy;
  sx << 0, 1, 1, 0;
  sy << 0, -I, I, 0;
  const M2 ry = r * id + I * r * sy;   // exp(+i pi/4 s_y): s_x -> s_z
  const M2 rx = r * id - I * r * sx;   // exp(-i pi/4 s_x): s_y -> s_z
  auto kron = [](const M2& a, const M2& b) {
    Mat4c m;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return m;
  };
  return {Mat4c::Identity(), kron(ry, id), kron(rx, id), kron(id, ry),
          kron(id, rx)};
}

void check_component(int c) {
  if (c < 0 || c > 4) throw ValidationError("component must be in 0..4");
}

}  // namespace

PopulationSolve solve_populations(const Vec4& counts,
                                  const PhotonCalibration& cal) {
  cal.validate();
  require_invertible(cal);
  return clip(design_matrix(cal).partialPivLu().solve(counts));
}

const Mat4c& readout_rotation(int component) {
  check_component(component);
  static const std::array<Mat4c, 5> rots = make_rotations();
  return rots[component];
}

double polarization_from_populations(const Vec4& populations, int component) {
  check_component(component);
  return weights(component).dot(populations);
}

Vec4 readout_populations(const State& psi, int component) {
  const State r = readout_rotation(component) * psi;
  return r.cwiseAbs2();
}

Vec4 dephased_populations(const HVector& h, const State& init, int component) {
  const double E = h.energy();
  if (E == 0.0) return readout_populations(init, component);
  const Mat4c Hn = build_hamiltonian(h) / E;
  const Mat4c id = Mat4c::Identity();
  const Mat4c& R = readout_rotation(component);
  const State up = R * (0.5 * (id + Hn) * init);
  const State dn = R * (0.5 * (id - Hn) * init);
  return up.cwiseAbs2() + dn.cwiseAbs2();
}

Eigen::Matrix4d population_covariance(const Vec4& populations,
                                      const PhotonCalibration& cal) {
  require_invertible(cal);
  const Eigen::Matrix4d Minv = design_matrix(cal).inverse();
  const Vec4 counts = expected_counts(populations, cal);
  return Minv * counts.asDiagonal() * Minv.transpose();
}

double polarization_variance(const Vec4& populations, int component,
                             const PhotonCalibration& cal) {
  const Vec4 w = weights(component);
  return w.dot(population_covariance(populations, cal) * w);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(master),
                    static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(trial >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

double draw_count(double mean, CountModel model, std::mt19937_64& gen) {
  if (model == CountModel::kPoisson) {
    std::poisson_distribution<long long> d(mean);
    return static_cast<double>(d(gen));
  }
  std::normal_distribution<double> d(mean, std::sqrt(mean));
  return d(gen);
}

}  // namespace

ReadoutEmulator::ReadoutEmulator(const ModelParams& p,
                                 const PhotonCalibration& truth,
                                 const NoiseOptions& opt, std::uint64_t seed)
    : p_(p), truth_(truth), estimate_(truth), opt_(opt), seed_(seed) {
  p_.validate();
  truth_.validate();
  if (opt_.n_times < 1) throw ValidationError("NoiseOptions: n_times >= 1");
  require_invertible(truth_);
  if (opt_.calibration_noise) {
    std::mt19937_64 gen(trial_seed(seed_, 0xCA11B4A7EULL));
    for (double& n : estimate_.counts) {
      n = draw_count(n, opt_.count_model, gen);
      if (!(n > 0.0)) n = 1.0;
    }
  }
  require_invertible(estimate_);
  inv_estimate_ = design_matrix(estimate_).inverse();
  if (opt_.signal == SignalModel::kWindowed) {
    if (!(opt_.window_end > opt_.window_start) || opt_.window_start < 0.0)
      throw ValidationError("NoiseOptions: empty readout window");
    tmax_ = t_max(p_, opt_.tmax_reading);
  }
}

double ReadoutEmulator::read(const Vec4& populations, int component,
                             std::mt19937_64& gen) const {
  const Vec4 mean = design_matrix(truth_) * populations;
  Vec4 counts;
  for (int i = 0; i < 4; ++i) counts[i] = draw_count(mean[i], opt_.count_model, gen);
  return polarization_from_populations(clip(inv_estimate_ * counts).populations,
                                       component);
}

std::uint64_t ReadoutEmulator::stream(const Vec3& k, const QuenchSpec& q,
                                      int component) const {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed_),
                                   static_cast<std::uint32_t>(seed_ >> 32)};
  auto push = [&](double x) {
    const auto b = std::bit_cast<std::uint64_t>(x + 0.0);
    words.push_back(static_cast<std::uint32_t>(b));
    words.push_back(static_cast<std::uint32_t>(b >> 32));
  };
  push(k.x());
  push(k.y());
  push(k.z());
  push(q.depth);
  words.push_back(static_cast<std::uint32_t>(q.axis));
  words.push_back(static_cast<std::uint32_t>(component));
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double ReadoutEmulator::measure(const Vec3& k, const QuenchSpec& q,
                                int component) const {
  check_component(component);
  const HVector h = h_vector(k, p_);
  const State init = init_state(k, p_, q).psi;
  std::mt19937_64 gen(stream(k, q, component));
  double acc = 0.0;
  if (opt_.signal == SignalModel::kDephased) {
    const Vec4 pops = dephased_populations(h, init, component);
    for (int i = 0; i < opt_.n_times; ++i) acc += read(pops, component, gen);
  } else {
    DephasingModel d;
    d.t_start = opt_.window_start * tmax_;
    d.t_end = opt_.window_end * tmax_;
    for (double t : window_times(d, std::max(2, opt_.n_times)))
      acc += read(readout_populations(evolve_state(h, init, t), component),
                  component, gen);
    return acc / std::max(2, opt_.n_times);
  }
  return acc / opt_.n_times;
}

PolarizationVector ReadoutEmulator::measure_all(const Vec3& k,
                                                const QuenchSpec& q) const {
  PolarizationVector out;
  for (int j = 0; j < 5; ++j) out[j] = measure(k, q, j);
  return out;
}

AverageFn ReadoutEmulator::averager() const {
  return [this](const Vec3& k, const QuenchSpec& q) { return measure_all(k, q); };
}

McReport mc_propagate(const std::function<double(std::uint64_t)>& pipeline,
                      int n_trials, std::uint64_t master_seed) {
  if (n_trials < 1) throw ValidationError("mc_propagate: n_trials >= 1");
  McReport r;
  r.n_trials = n_trials;
  r.seed = master_seed;
  std::vector<std::optional<double>> vals(n_trials);
  std::vector<std::string> errs(n_trials);
  parallel_for(static_cast<std::size_t>(n_trials), [&](std::size_t t) {
    try {
      const double v = pipeline(trial_seed(master_seed, t));
      if (std::isfinite(v))
        vals[t] = v;
      else
        errs[t] = "non-finite pipeline output";
    } catch (const std::exception& e) {
      errs[t] = e.what();
    }
  });
  for (int t = 0; t < n_trials; ++t) {
    if (vals[t]) {
      r.samples.push_back(*vals[t]);
    } else {
      ++r.n_failed;
      std::ostringstream os;
      os << "trial " << t << ": " << errs[t];
      r.failures.push_back(os.str());
    }
  }
  r.failure_fraction = static_cast<double>(r.n_failed) / n_trials;
  const std::size_t n = r.samples.size();
  if (n > 0) {
    double m = 0.0;
    for (double v : r.samples) m += v;
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : r.samples) ss += (v - m) * (v - m);
    r.mean = m;
    r.std = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    std::vector<double> sorted = r.samples;
    std::sort(sorted.begin(), sorted.end());
    r.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  r.insufficient = n_trials < 100 || n < 2;
  return r;
}

double noisy_transition_estimate(const ModelParams& p, const ReadoutEmulator& em,
                                 const std::vector<double>& depths,
                                 const Vec3& k0, const ProbeOptions& probe) {
  if (depths.size() < 2)
    throw ValidationError("noisy_transition_estimate: need >= 2 depths");
  TransitionOptions opt;
  opt.method = SlopeMethod::kProbe;
  opt.probe = probe;
  opt.averager = em.averager();
  std::vector<double> proj(depths.size());
  for (std::size_t i = 0; i < depths.size(); ++i)
    proj[i] = f_projection(k0, p, depths[i], opt);
  const LineFit fit = fit_line(depths, proj);
  if (fit.slope == 0.0)
    throw NotFoundError("noisy_transition_estimate: flat projection");
  return -fit.intercept / fit.slope;
}

}  // namespace chiralq
