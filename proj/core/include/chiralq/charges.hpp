#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chiralq/invariants.hpp"

namespace chiralq {

struct ThetaSample {
  Vec3 k = Vec3::Zero();
  Vec3 theta = Vec3::Zero();  // unit where norm_raw > 0
  double norm_raw = 0.0;
  bool on_bis = false;        // h_0 = 0: sign undefined, theta left zero
};

// sgn(h_0) (<gamma_0>_1, <gamma_0>_2, <gamma_0>_3) at quench depth m_i.
ThetaSample theta_field(const Vec3& k, const ModelParams& p, double depth,
                        const AverageFn& averager = {});

// <gamma_0>_i / h_0: same direction as Theta off the BIS, smooth through
// it. Its zeros are the charges and it is what the locator refines.
Vec3 charge_field(const Vec3& k, const ModelParams& p, double depth,
                  const AverageFn& averager = {});

struct Region {
  Vec3 lo = Vec3::Constant(-kPi);
  Vec3 hi = Vec3::Constant(kPi);
  int plane_axis = -1;  // >= 0: a plane at coordinate lo[plane_axis]

  static Region full_bz() { return {}; }
  static Region plane(int axis, double value);
  bool is_plane() const { return plane_axis >= 0; }
};

struct LocateOptions {
  double step = 0.05 * kPi;
  double dedupe = 0.02 * kPi;
  double tolerance = 1e-6;  // |Theta|_raw at an accepted zero
  AverageFn averager;
};

struct ChargeRecord {
  Vec3 location = Vec3::Zero();
  int value = 0;
  bool enclosed = false;
  bool on_bis = false;
  double depth = QuenchSpec::kInf;
  std::string label;
};

// Zeros of Theta off the BIS: sign-change scan on the grid plus Newton
// refinement, deduplicated and sorted lexicographically.
std::vector<ChargeRecord> locate_charges(const ModelParams& p, double depth,
                                         const Region& region,
                                         const LocateOptions& opt = {});

struct DegreeOptions {
  double radius = 0.05 * kPi;
  int level = 3;
  AverageFn averager;
};

// Degree of Theta on a small icosphere around `location`. Throws
// IllConditionedError when the solid-angle sum is not within 0.1 of an integer.
int charge_value(const Vec3& location, const ModelParams& p, double depth,
                 const DegreeOptions& opt = {});

// The deep-quench charge sites {0, -pi}^3 in the O_1..O_8 order of the
// k_z = 0 and k_z = -pi plane walk.
const std::vector<Vec3>& deep_charge_sites();
std::string charge_label(const Vec3& k);

struct EnclosureReport {
  int total = 0;
  std::vector<int> ambiguous;  // indices of charges sitting on the BIS
  std::optional<int> raycast_total;
};

// Enclosed iff sgn(h_0) at the charge equals sgn(h_0(Gamma)). Updates the
// enclosed flags. The ray-cast cross-check runs when the mesh does not
// touch the zone boundary.
EnclosureReport enclosed_total(const TriMesh& mesh,
                               std::vector<ChargeRecord>& charges,
                               const ModelParams& p);

// Parity of ray crossings from `point` along +x; nullopt when the mesh
// wraps across the zone boundary and inside is undefined.
std::optional<bool> raycast_inside(const TriMesh& mesh, const Vec3& point);

struct Segment {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  std::string name;
};

Segment o1_o8_segment();
Segment o3_o6_segment();

struct TrackOptions {
  int n_scan = 400;
  AverageFn averager;
};

struct TrackSample {
  double depth = 0.0;
  std::vector<double> s;   // segment parameter of each zero, ascending
  std::vector<Vec3> k;
  std::vector<int> h0_sign;
};

struct TrackResult {
  std::vector<TrackSample> samples;
  std::vector<double> crossings;      // depths where a zero crosses h_0 = 0
  std::vector<double> annihilations;  // depths where a pair disappears
  std::vector<std::string> gaps;
};

// Zeros of Theta restricted to the segment for each depth (any order; the
// samples keep the given order). Crossings and annihilations are refined
// by bisection in m_i between neighbouring depths.
TrackResult track_charges(const ModelParams& p,
                          const std::vector<double>& depths,
                          const Segment& segment, const TrackOptions& opt = {});

}  // namespace chiralq
