#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <vector>

#include "chiralq/errors.hpp"
#include "chiralq/numeric.hpp"
#include "chiralq/parallel.hpp"
#include "chiralq/types.hpp"

using namespace chiralq;

TEST(Numeric, NeumaierKeepsSmallTerms) {
  std::vector<double> xs{1.0, 1e100, 1.0, -1e100};
  EXPECT_EQ(compensated_sum(xs), 2.0);
}

TEST(Numeric, CompensatedSumIsOrderRobust) {
  std::vector<double> xs;
  for (int i = 1; i <= 10000; ++i) xs.push_back(1.0 / i);
  const double fwd = compensated_sum(xs);
  std::vector<double> rev(xs.rbegin(), xs.rend());
  EXPECT_EQ(fwd, compensated_sum(rev));
}

TEST(Numeric, WrapToZoneIsHalfOpen) {
  EXPECT_DOUBLE_EQ(wrap_to_bz(kPi), -kPi);
  EXPECT_DOUBLE_EQ(wrap_to_bz(-kPi), -kPi);
  EXPECT_NEAR(wrap_to_bz(3 * kPi + 0.5), -kPi + 0.5, 1e-12);
  EXPECT_NEAR(wrap_to_bz(-0.25), -0.25, 0.0);
  for (double k = -20.0; k < 20.0; k += 0.37) {
    const double w = wrap_to_bz(k);
    EXPECT_GE(w, -kPi);
    EXPECT_LT(w, kPi);
    EXPECT_NEAR(std::remainder(w - k, 2 * kPi), 0.0, 1e-12);
  }
}

TEST(Numeric, GoldenSectionFindsInteriorMinimum) {
  const auto r = golden_section_minimize([](double x) { return (x - 0.3) * (x - 0.3); },
                                         -1.0, 1.0, 1e-8);
  EXPECT_NEAR(r.x, 0.3, 1e-7);
  EXPECT_FALSE(r.at_edge);
}

TEST(Numeric, GoldenSectionFlagsEdgeMinimum) {
  const auto r = golden_section_minimize([](double x) { return x; }, 0.0, 1.0, 1e-8);
  EXPECT_TRUE(r.at_edge);
}

TEST(Numeric, BisectRoot) {
  EXPECT_NEAR(bisect_root([](double x) { return std::cos(x); }, 0.0, 3.0, 1e-12),
              kPi / 2, 1e-11);
  EXPECT_THROW(bisect_root([](double x) { return x * x + 1; }, -1.0, 1.0, 1e-9),
               NotFoundError);
}

TEST(Numeric, FitLineRecoversExactLine) {
  std::vector<double> x{0, 1, 2, 3}, y;
  for (double v : x) y.push_back(2.5 * v - 1.0);
  const auto f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.5, 1e-12);
  EXPECT_NEAR(f.intercept, -1.0, 1e-12);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  for (int threads : {1, 3, 8}) {
    set_thread_count(threads);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  set_thread_count(0);
}

TEST(Parallel, RethrowsWorkerException) {
  set_thread_count(4);
  EXPECT_THROW(parallel_for(100,
                            [](std::size_t i) {
                              if (i == 57) throw DomainError("boom");
                            }),
               DomainError);
  set_thread_count(0);
}
