#include "chiralq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chiralq/errors.hpp"
#include "chiralq/parallel.hpp"

namespace chiralq {

bool ScalarGrid::has_negative() const {
  return std::any_of(values.begin(), values.end(),
                     [](double v) { return v < 0.0; });
}

double ScalarGrid::interpolate(const Vec3& k) const {
  std::array<int, 3> i0{};
  std::array<double, 3> f{};
  for (int a = 0; a < 3; ++a) {
    double u = (k[a] - origin[a]) / step;
    u = std::clamp(u, 0.0, static_cast<double>(dims[a] - 1));
    int i = static_cast<int>(std::floor(u));
    if (i >= dims[a] - 1) i = dims[a] - 2;
    i0[a] = i;
    f[a] = u - i;
  }
  double acc = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int dx = c >> 2 & 1, dy = c >> 1 & 1, dz = c & 1;
    const double w = (dx ? f[0] : 1 - f[0]) * (dy ? f[1] : 1 - f[1]) *
                     (dz ? f[2] : 1 - f[2]);
    if (w != 0.0) acc += w * at(i0[0] + dx, i0[1] + dy, i0[2] + dz);
  }
  return acc;
}

ScalarGrid sample_octant(const ModelParams& p, const QuenchSpec& q,
                         double step, GridQuantity quantity,
                         const AverageFn& averager) {
  p.validate();
  q.validate();
  if (!(step > 0.0)) throw ValidationError("sample_octant: step must be > 0");
  const double cells = kPi / step;
  const long n = std::lround(cells);
  if (n < 1 || std::abs(cells - n) > 1e-9) {
    std::ostringstream os;
    os << "sample_octant: step " << step / kPi << " pi does not divide pi";
    throw ValidationError(os.str());
  }
  ScalarGrid g;
  g.origin = Vec3::Zero();
  g.step = kPi / static_cast<double>(n);
  g.dims = {static_cast<int>(n) + 1, static_cast<int>(n) + 1,
            static_cast<int>(n) + 1};
  g.values.assign(static_cast<std::size_t>(g.dims[0]) * g.dims[1] * g.dims[2],
                  0.0);
  const AverageFn avg = averager ? averager : exact_averager(p);
  const int d = g.dims[0];
  parallel_for(g.values.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx / (d * d));
    const int j = static_cast<int>(idx / d % d);
    const int k = static_cast<int>(idx % d);
    const Vec3 kv = g.point(i, j, k);
    double v = avg(kv, q)[0];
    if (quantity == GridQuantity::kSignedAverage) {
      const double h0 = h_vector(kv, p)[0];
      v = h0 < 0.0 ? -v : v;
    }
    g.values[idx] = v;
  });
  return g;
}

ScalarGrid smooth(const ScalarGrid& grid, double width) {
  if (!(width >= 0.0)) throw ValidationError("smooth: width must be >= 0");
  if (width == 0.0) return grid;
  const int r = static_cast<int>(std::ceil(3.0 * width));
  std::vector<double> kernel(2 * r + 1);
  double norm = 0.0;
  for (int i = -r; i <= r; ++i) {
    kernel[i + r] = std::exp(-0.5 * i * i / (width * width));
    norm += kernel[i + r];
  }
  for (double& w : kernel) w /= norm;

  auto mirror = [](int i, int n) {
    // reflect about the end samples until inside [0, n)
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
  };

  ScalarGrid cur = grid;
  for (int axis = 0; axis < 3; ++axis) {
    ScalarGrid next = cur;
    const int n = cur.dims[axis];
    for (int i = 0; i < cur.dims[0]; ++i)
      for (int j = 0; j < cur.dims[1]; ++j)
        for (int k = 0; k < cur.dims[2]; ++k) {
          std::array<int, 3> idx{i, j, k};
          const int c = idx[axis];
          double acc = 0.0;
          for (int o = -r; o <= r; ++o) {
            idx[axis] = mirror(c + o, n);
            acc += kernel[o + r] * cur.at(idx[0], idx[1], idx[2]);
          }
          next.at(i, j, k) = acc;
        }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace chiralq
