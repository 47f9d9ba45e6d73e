#pragma once

#include <functional>
#include <span>

namespace chiralq {

// Neumaier's variant of Kahan summation; order-robust for the winding sums.
class NeumaierSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

// Maps any real to the half-open zone [-pi, pi).
double wrap_to_bz(double k);

struct GoldenResult {
  double x = 0.0;
  double fx = 0.0;
  bool at_edge = false;  // minimum sits on the bracket boundary
};

GoldenResult golden_section_minimize(const std::function<double(double)>& f,
                                     double lo, double hi, double tol);

// Bisection on a sign change; throws NotFoundError without one.
double bisect_root(const std::function<double(double)>& f, double lo,
                   double hi, double tol);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace chiralq
