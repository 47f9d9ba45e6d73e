#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "chiralq/dynamics.hpp"
#include "chiralq/errors.hpp"
#include "chiralq/prep.hpp"
#include "test_support.hpp"

using namespace chiralq;

namespace {

double residual(const HVector& h_pre, const State& psi) {
  const Mat4c H = build_hamiltonian(h_pre);
  const cplx e = psi.dot(H * psi);
  return (H * psi - e * psi).norm();
}

}  // namespace

TEST(Prep, PrequenchExamples) {
  ModelParams p;
  const Vec3 k(0.3, -1.2, 2.0);
  const HVector zero = prequench_h(k, p, QuenchSpec::shallow(2, 0.0));
  EXPECT_LT((zero.h - h_vector(k, p).h).norm(), 1e-15);

  const HVector s = prequench_h(Vec3(0, 0, 0), p, QuenchSpec::shallow(0, 2.0));
  EXPECT_NEAR(s[0], 0.4, 1e-14);

  const HVector d = prequench_h(k, p, QuenchSpec::deep(1));
  EXPECT_EQ(d.h, Vec5(0, 1, 0, 0, 0));
}

TEST(Prep, QuenchSpecValidation) {
  EXPECT_THROW(QuenchSpec::shallow(0, -1.0).validate(), ValidationError);
  EXPECT_THROW(QuenchSpec::shallow(5, 1.0).validate(), ValidationError);
  EXPECT_NO_THROW(QuenchSpec::deep(3).validate());
}

TEST(Prep, DeepGammaZeroGivesZeroZero) {
  const PreparedState s = init_state(Vec3(0.1, 0.2, 0.3), ModelParams{}, QuenchSpec::deep(0));
  EXPECT_NEAR(std::abs(s.psi[0]), 1.0, 1e-15);
  EXPECT_NEAR(s.psi.tail<3>().norm(), 0.0, 1e-15);
  EXPECT_EQ(s.band_sign, +1);
  EXPECT_NEAR(polarization(s.psi)[0], 1.0, 1e-15);
}

TEST(Prep, PureGammaZeroFieldHasZeroAngles) {
  const InitRotation r = init_rotation(HVector(0.7, 0, 0, 0, 0));
  EXPECT_EQ(r.theta_mw, 0.0);
  EXPECT_EQ(r.theta_rf, 0.0);
  const PreparedState s = prepare_eigenstate(HVector(0.7, 0, 0, 0, 0));
  EXPECT_NEAR(std::abs(s.psi[0]), 1.0, 1e-15);
}

TEST(Prep, ShallowExampleIsEigenstate) {
  ModelParams p;
  const Vec3 k = Vec3(0.1, 0.6, 0.1) * kPi;
  const QuenchSpec q = QuenchSpec::shallow(0, 2.0);
  const PreparedState s = init_state(k, p, q);
  EXPECT_LT(s.residual, 1e-10);
  EXPECT_LT(residual(prequench_h(k, p, q), s.psi), 1e-10);
  EXPECT_TRUE(s.band_sign == 1 || s.band_sign == -1);
}

TEST(Prep, EigenstateResidualOverRandomSpecs) {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<int> axis(0, 3);
  std::uniform_real_distribution<double> depth(0.1, 10.0);
  for (int n = 0; n < 1000; ++n) {
    ModelParams p = test::random_params(gen);
    if (n % 2) p.h_4 = depth(gen) - 5.0;
    const Vec3 k = test::random_k(gen);
    const QuenchSpec q = n % 3 == 0 ? QuenchSpec::deep(axis(gen))
                                    : QuenchSpec::shallow(axis(gen), depth(gen));
    const HVector h = prequench_h(k, p, q);
    if (h.energy() < 1e-9) continue;
    const PreparedState s = init_state(k, p, q);
    EXPECT_NEAR(s.psi.norm(), 1.0, 1e-12);
    EXPECT_LT(s.residual, 1e-10);
    EXPECT_LT(residual(h, s.psi), 1e-10);
  }
}

TEST(Prep, ZeroFieldIsDegenerate) {
  EXPECT_THROW(prepare_eigenstate(HVector()), DegenerateError);
}

TEST(Prep, RotationsCommute) {
  std::mt19937_64 gen(22);
  for (int n = 0; n < 200; ++n) {
    const InitRotation r = init_rotation(test::random_h(gen));
    const Mat4c a = mw_rotation(r), b = rf_rotation(r);
    EXPECT_LT((a * b - b * a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a * a.adjoint() - Mat4c::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((b * b.adjoint() - Mat4c::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Prep, DeepLimitPolarizationGrowsMonotonically) {
  ModelParams p;
  const Vec3 k = Vec3(0.1, 0.6, 0.1) * kPi;
  for (int axis = 0; axis < 4; ++axis) {
    double last = -2.0;
    for (double m : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 1e3}) {
      const double v = polarization(init_state(k, p, QuenchSpec::shallow(axis, m)).psi)[axis];
      EXPECT_GT(v, last) << axis << " " << m;
      last = v;
    }
    EXPECT_NEAR(last, 1.0, 1e-3);
    EXPECT_NEAR(polarization(init_state(k, p, QuenchSpec::deep(axis)).psi)[axis], 1.0, 1e-12);
  }
}

TEST(Prep, CompileExamples) {
  // A < 0 flips the sign of the effective gamma_0 term, so a pure +gamma_0
  // target needs the sideband pulse turned fully over.
  const PulseParams a = compile_pulse(HVector(1, 0, 0, 0, 0));
  EXPECT_NEAR(a.alpha, 2.0 / (kPi * 2.16), 1e-15);
  EXPECT_NEAR(a.alpha, 0.29473, 5e-6);
  EXPECT_EQ(a.omega_mw, 0.0);
  EXPECT_NEAR(a.theta, kPi, 1e-15);

  const PulseParams b = compile_pulse(HVector(0, 1, 0, 1, 0));
  EXPECT_NEAR(b.theta, kPi / 2, 1e-15);
  EXPECT_NEAR(b.phi, 0.0, 1e-15);

  EXPECT_THROW(compile_pulse(HVector(0, 1, 1, 0, 0)), DegenerateError);
}

TEST(Prep, PulseRoundTrip) {
  EXPECT_LT(verify_pulse_roundtrip(HVector(1, 0, 0, 0, 0)), 1e-12);
  EXPECT_LT(verify_pulse_roundtrip(HVector(0.3, 0.1, 0.2, 0.15, 0.05)), 1e-9);
  std::mt19937_64 gen(23);
  for (int n = 0; n < 1000; ++n) {
    const HVector h = test::random_h(gen);
    EXPECT_LT(verify_pulse_roundtrip(h), 1e-9);
    const Mat4c H = reconstruct_hamiltonian(compile_pulse(h));
    EXPECT_LT((H - build_hamiltonian(h)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Prep, PulseWithoutGammaFourHasTrivialSidebandPhase) {
  std::mt19937_64 gen(24);
  for (int n = 0; n < 100; ++n) {
    HVector h = test::random_h(gen);
    h[4] = 0.0;
    const PulseParams pp = compile_pulse(h);
    EXPECT_NEAR(std::abs(std::sin(pp.phi_sb)), 0.0, 1e-12);
  }
}

TEST(Prep, PulseTableHasHeaderAndRows) {
  std::ostringstream os;
  const std::vector<Vec3> ks = {Vec3(0, 0, 0), Vec3(0.1, 0.6, 0.1) * kPi};
  write_pulse_table(os, ks, ModelParams{});
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
  EXPECT_NE(s.find("alpha"), std::string::npos);
}
