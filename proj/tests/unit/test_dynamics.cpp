#include <gtest/gtest.h>

#include <cmath>

#include "chiralq/dynamics.hpp"
#include "chiralq/errors.hpp"
#include "chiralq/prep.hpp"
#include "test_support.hpp"

using namespace chiralq;

namespace {

State zero_zero() {
  State s = State::Zero();
  s[0] = 1.0;
  return s;
}

ModelParams reference_params() {
  ModelParams p;
  p.m_z = 1.4;
  p.t_so = 0.2;
  return p;
}

}  // namespace

TEST(Dynamics, GammaPointKeepsZeroZero) {
  const ModelParams p = reference_params();
  for (double t : {0.0, 0.7, 13.0}) {
    const PolarizationVector v = evolve_polarization(Vec3(0, 0, 0), p, zero_zero(), t);
    EXPECT_NEAR(v[0], 1.0, 1e-14);
    for (int j = 1; j < 5; ++j) EXPECT_NEAR(v[j], 0.0, 1e-14);
  }
}

TEST(Dynamics, TimeZeroIsIdentity) {
  std::mt19937_64 gen(31);
  for (int n = 0; n < 20; ++n) {
    const State s = test::random_state(gen);
    const Vec3 k = test::random_k(gen);
    const ModelParams p = test::random_params(gen);
    EXPECT_LT((evolve_polarization(k, p, s, 0.0).p - polarization(s).p).norm(), 1e-15);
    EXPECT_LT((dense_evolution_oracle(k, p, s, 0.0).p - polarization(s).p).norm(), 1e-12);
  }
}

TEST(Dynamics, ZeroHamiltonianIsStatic) {
  std::mt19937_64 gen(32);
  const State s = test::random_state(gen);
  EXPECT_EQ((evolve_state(HVector(), s, 5.0) - s).norm(), 0.0);
}

TEST(Dynamics, QuarterPeriodMatchesDenseOracle) {
  const ModelParams p = reference_params();
  const Vec3 k = Vec3(0.1, 0.6, 0.1) * kPi;
  const double t = kPi / (2.0 * h_vector(k, p).energy());
  const auto a = evolve_polarization(k, p, zero_zero(), t);
  const auto b = dense_evolution_oracle(k, p, zero_zero(), t);
  EXPECT_LT((a.p - b.p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dynamics, ClosedFormAgreesWithDenseOracle) {
  std::mt19937_64 gen(33);
  std::uniform_real_distribution<double> tu(0.0, 50.0), h4(-1.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    ModelParams p = test::random_params(gen);
    if (n % 2) p.h_4 = h4(gen);
    const Vec3 k = test::random_k(gen);
    const State s = test::random_state(gen);
    const double t = tu(gen);
    const auto a = evolve_polarization(k, p, s, t);
    const auto b = dense_evolution_oracle(k, p, s, t);
    worst = std::max(worst, (a.p - b.p).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Dynamics, Unitarity) {
  std::mt19937_64 gen(34);
  std::uniform_real_distribution<double> tu(0.0, 1e3);
  for (int n = 0; n < 500; ++n) {
    const State s = test::random_state(gen);
    const State u = evolve_state(test::random_h(gen), s, tu(gen));
    EXPECT_NEAR(u.norm(), 1.0, 1e-12);
  }
}

TEST(Dynamics, PolarizationBounds) {
  std::mt19937_64 gen(35);
  for (int n = 0; n < 200; ++n) {
    const PolarizationVector v = polarization(test::random_state(gen));
    EXPECT_LE(v.p.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
    EXPECT_LE(v.p.squaredNorm(), 1.0 + 1e-12);
  }
}

TEST(Dynamics, RejectsUnnormalizedState) {
  State s = State::Zero();
  s[0] = 1.1;
  EXPECT_THROW(require_normalized(s), ValidationError);
  EXPECT_THROW(evolve_polarization(Vec3(0, 0, 0), ModelParams{}, s, 1.0), ValidationError);
}

TEST(Dynamics, ReferenceTimeAverage) {
  const auto r = time_avg_polarization(Vec3(0.1, 0.6, 0.1) * kPi, reference_params(), QuenchSpec::deep(0));
  EXPECT_FALSE(r.gap_closed);
  EXPECT_NEAR(r.value[0], 0.460, 5e-4);
}

TEST(Dynamics, TimeAverageVanishesOnBis) {
  const ModelParams p = reference_params();
  // h_0 = 0 on the diagonal where 3 cos k = m_z.
  const Vec3 k = Vec3::Constant(std::acos(p.m_z / 3.0));
  const auto r = time_avg_polarization(k, p, QuenchSpec::deep(0));
  EXPECT_LT(r.value.p.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Dynamics, TimeAverageAtGamma) {
  const auto r = time_avg_polarization(Vec3(0, 0, 0), reference_params(), QuenchSpec::deep(0));
  EXPECT_NEAR(r.value[0], 1.0, 1e-15);
  EXPECT_NEAR(r.value.p.tail<4>().norm(), 0.0, 1e-15);
}

TEST(Dynamics, GapClosedFlag) {
  ModelParams p;
  p.m_z = 3.0;
  const auto r = time_avg_polarization(Vec3(0, 0, 0), p, QuenchSpec::deep(1));
  EXPECT_TRUE(r.gap_closed);
}

TEST(Dynamics, DeepQuenchProductRule) {
  std::mt19937_64 gen(36);
  for (int n = 0; n < 300; ++n) {
    ModelParams p = test::random_params(gen);
    if (n % 2) p.h_4 = 0.4;
    const Vec3 k = test::random_k(gen);
    const HVector h = h_vector(k, p);
    const double E2 = h.h.squaredNorm();
    for (int i = 0; i < 4; ++i) {
      const auto a = time_avg_polarization(k, p, QuenchSpec::deep(i)).value;
      for (int j = 0; j < 5; ++j) EXPECT_NEAR(a[j], h[i] * h[j] / E2, 1e-12);
    }
  }
}

TEST(Dynamics, LongRunAverageConvergesToProjectorAverage) {
  const ModelParams p = reference_params();
  const Vec3 k = Vec3(0.1, 0.6, 0.1) * kPi;
  const QuenchSpec q = QuenchSpec::shallow(1, 1.5);
  const State init = init_state(k, p, q).psi;
  const HVector h = h_vector(k, p);
  const double E = h.energy();
  const auto exact = time_avg_polarization(h, init).value;
  double prev = 1.0;
  for (int periods : {4, 16, 64}) {
    // quadrature over whole periods of the 2E oscillation: error decays
    // with the window length
    const DephasingModel d{0.0, 0.0, 0.0, periods * kPi / E + 0.37};
    const auto w = windowed_avg_polarization(h, init, d, 64 * periods);
    const double err = (w.p - exact.p).cwiseAbs().maxCoeff();
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 5e-3);
}

TEST(Dynamics, SingleOscillationFrequency) {
  const ModelParams p = reference_params();
  const Vec3 k = Vec3(0.1, 0.6, 0.1) * kPi;
  const HVector h = h_vector(k, p);
  std::mt19937_64 gen(37);
  const State init = test::random_state(gen);
  const OscillationParts o = oscillation_parts(h, init);
  EXPECT_NEAR(o.frequency, 2.0 * h.energy(), 1e-15);
  for (double t : {0.0, 0.3, 2.9, 17.0}) {
    const auto v = polarization(evolve_state(h, init, t));
    for (int j = 0; j < 5; ++j)
      EXPECT_NEAR(v[j], o.constant[j] + o.cos_part[j] * std::cos(o.frequency * t) +
                            o.sin_part[j] * std::sin(o.frequency * t),
                  1e-12);
  }
}

TEST(Dynamics, TmaxExamples) {
  ModelParams p;
  p.m_z = 0.0;
  p.t_so = 1.0;
  EXPECT_NEAR(t_max(p), 2.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(t_max(p), 1.1547, 5e-5);
  p.m_z = 1.4;
  p.t_so = 0.2;
  EXPECT_NEAR(t_max(p), 6.528, 5e-4);
  p.m_z = 3.0;
  EXPECT_THROW(t_max(p), DomainError);
  p.m_z = 0.1;
  EXPECT_NO_THROW(t_max(p, TmaxReading::kThreeMzOverT0));
  p.m_z = 1.4;
  EXPECT_THROW(t_max(p, TmaxReading::kThreeMzOverT0), DomainError);
}

TEST(Dynamics, WindowTimesIncludeEnds) {
  const auto ts = window_times({0.0, 0.0, 2.0, 3.0}, 5);
  ASSERT_EQ(ts.size(), 5u);
  EXPECT_EQ(ts.front(), 2.0);
  EXPECT_EQ(ts.back(), 3.0);
  EXPECT_NEAR(ts[2], 2.5, 1e-15);
  EXPECT_THROW(window_times({0.0, 0.0, 3.0, 3.0}, 5), ValidationError);
  EXPECT_THROW(window_times({-1.0, 0.0, 0.0, 3.0}, 5), ValidationError);
}

TEST(Dynamics, InfiniteFastRateLeavesConstantPart) {
  const ModelParams p = reference_params();
  const Vec3 k = Vec3(0.1, 0.6, 0.1) * kPi;
  const HVector h = h_vector(k, p);
  std::mt19937_64 gen(38);
  const State init = test::random_state(gen);
  const OscillationParts o = oscillation_parts(h, init);
  const DephasingModel d{std::numeric_limits<double>::infinity(), 0.0, 0.5, 2.0};
  const auto w = windowed_avg_polarization(h, init, d);
  EXPECT_EQ(w[1], o.constant[1]);
  EXPECT_EQ(w[2], o.constant[2]);
  EXPECT_NE(w[0], o.constant[0]);
}

TEST(Dynamics, ExactAveragerMatchesDirectCall) {
  const ModelParams p = reference_params();
  const AverageFn avg = exact_averager(p);
  const Vec3 k(0.4, -1.1, 2.2);
  const QuenchSpec q = QuenchSpec::shallow(2, 1.7);
  EXPECT_EQ(avg(k, q).p, time_avg_polarization(k, p, q).value.p);
}
