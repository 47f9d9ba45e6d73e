#pragma once

#include <array>
#include <vector>

#include "chiralq/dynamics.hpp"

namespace chiralq {

struct ScalarGrid {
  Vec3 origin = Vec3::Zero();
  double step = 0.1 * kPi;
  std::array<int, 3> dims{2, 2, 2};
  std::vector<double> values;  // z fastest

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k;
  }
  double& at(int i, int j, int k) { return values[index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
  Vec3 point(int i, int j, int k) const {
    return origin + step * Vec3(i, j, k);
  }
  bool has_negative() const;

  // Trilinear; points outside the box are clamped onto it.
  double interpolate(const Vec3& k) const;
};

enum class GridQuantity {
  kAverage,       // <gamma_0>_q as measured
  kSignedAverage  // sgn(h_0) * <gamma_0>_q, changes sign across the BIS
};

// First octant [0, pi]^3. The step must divide pi to within 1e-9.
ScalarGrid sample_octant(const ModelParams& p, const QuenchSpec& q,
                         double step = 0.1 * kPi,
                         GridQuantity quantity = GridQuantity::kAverage,
                         const AverageFn& averager = {});

// Separable Gaussian with standard deviation `width` in grid cells and a
// mirrored boundary (index -i reads i).
ScalarGrid smooth(const ScalarGrid& grid, double width);

}  // namespace chiralq
