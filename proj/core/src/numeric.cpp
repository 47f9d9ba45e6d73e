#include "chiralq/numeric.hpp"

#include <cmath>

#include "chiralq/errors.hpp"
#include "chiralq/types.hpp"

namespace chiralq {

void NeumaierSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
  NeumaierSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

double wrap_to_bz(double k) {
  if (k >= -kPi && k < kPi) return k;
  double w = k - 2.0 * kPi * std::floor((k + kPi) / (2.0 * kPi));
  // floor can land exactly on the excluded edge through rounding
  if (w >= kPi) w -= 2.0 * kPi;
  if (w < -kPi) w = -kPi;
  return w;
}

GoldenResult golden_section_minimize(const std::function<double(double)>& f,
                                     double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  GoldenResult r;
  r.x = 0.5 * (a + b);
  r.fx = f(r.x);
  const double edge = 2.0 * tol;
  r.at_edge = (r.x - lo < edge) || (hi - r.x < edge);
  return r;
}

double bisect_root(const std::function<double(double)>& f, double lo,
                   double hi, double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw NotFoundError("bisect_root: no sign change in bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("fit_line: need at least two paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ValidationError("fit_line: abscissae coincide");
  LineFit r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  return r;
}

}  // namespace chiralq
