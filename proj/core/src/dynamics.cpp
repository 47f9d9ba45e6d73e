#include "chiralq/dynamics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "chiralq/errors.hpp"

namespace chiralq {

namespace {

double expect(const State& a, const Mat4c& g, const State& b) {
  return a.dot(g * b).real();
}

}  // namespace

PolarizationVector polarization(const State& psi) {
  const auto& g = gamma_matrices();
  PolarizationVector out;
  for (int j = 0; j < 5; ++j) out[j] = expect(psi, g[j], psi);
  return out;
}

void require_normalized(const State& psi) {
  const double n = psi.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "initial state has norm " << n << ", expected 1";
    throw ValidationError(os.str());
  }
}

State evolve_state(const HVector& h, const State& init, double t) {
  const double E = h.energy();
  if (E == 0.0) return init;
  const Mat4c H = build_hamiltonian(h);
  const cplx I(0.0, 1.0);
  return std::cos(E * t) * init - I * (std::sin(E * t) / E) * (H * init);
}

PolarizationVector evolve_polarization(const Vec3& k, const ModelParams& p,
                                       const State& init, double t) {
  require_normalized(init);
  return polarization(evolve_state(h_vector(k, p), init, t));
}

PolarizationVector dense_evolution_oracle(const Vec3& k, const ModelParams& p,
                                          const State& init, double t) {
  require_normalized(init);
  const Mat4c H = build_hamiltonian(h_vector(k, p));
  Eigen::SelfAdjointEigenSolver<Mat4c> es(H);
  const cplx I(0.0, 1.0);
  Eigen::Vector4cd phases;
  for (int i = 0; i < 4; ++i) phases[i] = std::exp(-I * es.eigenvalues()[i] * t);
  const Mat4c& V = es.eigenvectors();
  const State psi = V * phases.asDiagonal() * (V.adjoint() * init);
  return polarization(psi);
}

OscillationParts oscillation_parts(const HVector& h, const State& init) {
  const auto& g = gamma_matrices();
  OscillationParts out;
  const double E = h.energy();
  if (E == 0.0) {
    out.constant = polarization(init).p;
    return out;
  }
  const Mat4c Hn = build_hamiltonian(h) / E;
  const Mat4c id = Mat4c::Identity();
  const State up = 0.5 * (id + Hn) * init;
  const State dn = 0.5 * (id - Hn) * init;
  // psi(t) = e^{-iEt} up + e^{iEt} dn, so the cross term oscillates at 2E
  for (int j = 0; j < 5; ++j) {
    out.constant[j] = expect(up, g[j], up) + expect(dn, g[j], dn);
    const cplx cross = up.dot(g[j] * dn);  // <up|g|dn>
    // 2 Re(<up|g|dn> e^{2iEt}) = 2 Re(c) cos - 2 Im(c) sin
    out.cos_part[j] = 2.0 * cross.real();
    out.sin_part[j] = -2.0 * cross.imag();
  }
  out.frequency = 2.0 * E;
  return out;
}

TimeAverage time_avg_polarization(const HVector& h, const State& init) {
  require_normalized(init);
  TimeAverage r;
  if (h.energy() == 0.0) {
    r.value = polarization(init);
    r.gap_closed = true;
    return r;
  }
  r.value.p = oscillation_parts(h, init).constant;
  return r;
}

TimeAverage time_avg_polarization(const Vec3& k, const ModelParams& p,
                                  const QuenchSpec& q) {
  return time_avg_polarization(h_vector(k, p), init_state(k, p, q).psi);
}

AverageFn exact_averager(const ModelParams& p) {
  return [p](const Vec3& k, const QuenchSpec& q) {
    return time_avg_polarization(k, p, q).value;
  };
}

double t_max(const ModelParams& p, TmaxReading reading) {
  p.validate();
  const double x = reading == TmaxReading::kMzOver3T0 ? p.m_z / (3.0 * p.t_0)
                                                      : 3.0 * p.m_z / p.t_0;
  if (!(std::abs(x) < 1.0)) {
    std::ostringstream os;
    os << "t_max: arccos argument " << x << " outside (-1, 1)";
    throw DomainError(os.str());
  }
  return 2.0 / (std::sqrt(3.0) * p.t_so * std::sin(std::acos(x)));
}

void DephasingModel::validate() const {
  std::ostringstream os;
  if (!(rate_fast >= 0.0)) os << "rate_fast must be >= 0; ";
  if (!(rate_slow >= 0.0)) os << "rate_slow must be >= 0; ";
  if (!(t_start >= 0.0)) os << "t_start must be >= 0; ";
  if (!(t_end > t_start)) os << "window is empty (t_end <= t_start); ";
  if (!os.str().empty()) throw ValidationError("DephasingModel: " + os.str());
}

std::vector<double> window_times(const DephasingModel& d, int n_samples) {
  d.validate();
  if (n_samples < 2) throw ValidationError("window needs n_samples >= 2");
  std::vector<double> ts(n_samples);
  const double dt = (d.t_end - d.t_start) / (n_samples - 1);
  for (int i = 0; i < n_samples; ++i) ts[i] = d.t_start + i * dt;
  ts.back() = d.t_end;
  return ts;
}

PolarizationVector windowed_avg_polarization(const HVector& h,
                                             const State& init,
                                             const DephasingModel& d,
                                             int n_samples) {
  require_normalized(init);
  const std::vector<double> ts = window_times(d, n_samples);
  const OscillationParts o = oscillation_parts(h, init);
  PolarizationVector out;
  for (int j = 0; j < 5; ++j) {
    const double rate = d.rate_for(j);
    double acc = 0.0;
    for (double t : ts) {
      const double damp = std::isinf(rate) ? 0.0 : std::exp(-rate * t);
      acc += damp * (o.cos_part[j] * std::cos(o.frequency * t) +
                     o.sin_part[j] * std::sin(o.frequency * t));
    }
    out[j] = o.constant[j] + acc / static_cast<double>(ts.size());
  }
  return out;
}

PolarizationVector windowed_avg_polarization(const Vec3& k,
                                             const ModelParams& p,
                                             const QuenchSpec& q,
                                             const DephasingModel& d,
                                             int n_samples) {
  return windowed_avg_polarization(h_vector(k, p), init_state(k, p, q).psi, d,
                                   n_samples);
}

}  // namespace chiralq
