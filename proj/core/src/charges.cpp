#include "chiralq/charges.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "chiralq/errors.hpp"
#include "chiralq/numeric.hpp"
#include "chiralq/parallel.hpp"

namespace chiralq {

namespace {

Vec3 raw_theta_components(const Vec3& k, double depth, const AverageFn& avg) {
  Vec3 r;
  for (int i = 1; i <= 3; ++i) r[i - 1] = avg(k, {i, depth})[0];
  return r;
}

AverageFn backend(const ModelParams& p, const AverageFn& averager) {
  return averager ? averager : exact_averager(p);
}

Vec3 wrap3(const Vec3& k) {
  return Vec3(wrap_to_bz(k.x()) + 0.0, wrap_to_bz(k.y()) + 0.0,
              wrap_to_bz(k.z()) + 0.0);
}

}  // namespace

ThetaSample theta_field(const Vec3& k, const ModelParams& p, double depth,
                        const AverageFn& averager) {
  p.validate();
  ThetaSample s;
  s.k = k;
  const double h0 = h_vector(k, p)[0];
  if (h0 == 0.0) {
    s.on_bis = true;
    return s;
  }
  Vec3 raw = raw_theta_components(k, depth, backend(p, averager));
  if (h0 < 0.0) raw = -raw;
  s.norm_raw = raw.norm();
  if (s.norm_raw > 0.0) s.theta = raw / s.norm_raw;
  return s;
}

Vec3 charge_field(const Vec3& k, const ModelParams& p, double depth,
                  const AverageFn& averager) {
  const double h0 = h_vector(k, p)[0];
  const Vec3 raw = raw_theta_components(k, depth, backend(p, averager));
  if (h0 == 0.0) return Vec3::Constant(std::numeric_limits<double>::infinity());
  return raw / h0;
}

Region Region::plane(int axis, double value) {
  if (axis < 0 || axis > 2) throw ValidationError("Region::plane: axis 0..2");
  Region r;
  r.lo[axis] = r.hi[axis] = value;
  r.plane_axis = axis;
  return r;
}

const std::vector<Vec3>& deep_charge_sites() {
  static const std::vector<Vec3> sites = {
      {0, 0, 0},       {-kPi, 0, 0},       {-kPi, -kPi, 0},    {0, -kPi, 0},
      {0, -kPi, -kPi}, {0, 0, -kPi},       {-kPi, 0, -kPi},    {-kPi, -kPi, -kPi}};
  return sites;
}

std::string charge_label(const Vec3& k) {
  const auto& s = deep_charge_sites();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (periodic_delta(s[i], k).cwiseAbs().maxCoeff() < 1e-6)
      return "O" + std::to_string(i + 1);
  return {};
}

namespace {

bool straddles(double lo, double hi) {
  const double eps = 1e-12;
  return lo <= eps && hi >= -eps;
}

// Newton on the free coordinates of the charge field; returns the root or
// nothing when it diverges.
std::optional<Vec3> newton_zero(const Vec3& start, const ModelParams& p,
                                double depth, const AverageFn& avg,
                                int fixed_axis, double max_step) {
  Vec3 x = start;
  std::vector<int> free;
  for (int a = 0; a < 3; ++a)
    if (a != fixed_axis) free.push_back(a);
  const int nf = static_cast<int>(free.size());
  // equations: all three components for a volume search, the in-plane
  // ones when the plane coordinate is pinned
  std::vector<int> eqs = free;
  if (fixed_axis < 0) eqs = {0, 1, 2};
  for (int it = 0; it < 60; ++it) {
    const Vec3 F = charge_field(x, p, depth, avg);
    if (!F.allFinite()) return std::nullopt;
    Eigen::MatrixXd J(nf, nf);
    Eigen::VectorXd rhs(nf);
    const double h = 1e-7;
    for (int c = 0; c < nf; ++c) {
      Vec3 xp = x, xm = x;
      xp[free[c]] += h;
      xm[free[c]] -= h;
      const Vec3 d = (charge_field(xp, p, depth, avg) -
                      charge_field(xm, p, depth, avg)) / (2 * h);
      for (int r = 0; r < nf; ++r) J(r, c) = d[eqs[r]];
    }
    for (int r = 0; r < nf; ++r) rhs[r] = -F[eqs[r]];
    Eigen::VectorXd dx = J.colPivHouseholderQr().solve(rhs);
    if (!dx.allFinite()) return std::nullopt;
    const double len = dx.norm();
    if (len > max_step) dx *= max_step / len;
    for (int c = 0; c < nf; ++c) x[free[c]] += dx[c];
    if (len < 1e-14) break;
  }
  return x;
}

}  // namespace

std::vector<ChargeRecord> locate_charges(const ModelParams& p, double depth,
                                         const Region& region,
                                         const LocateOptions& opt) {
  p.validate();
  if (std::isnan(depth) || !(depth > 0.0))
    throw ValidationError("locate_charges: depth must be > 0 or infinite");
  if (!(opt.step > 0.0)) throw ValidationError("locate_charges: step > 0");
  const AverageFn avg = backend(p, opt.averager);

  std::array<int, 3> n{};
  std::array<bool, 3> periodic{};
  for (int a = 0; a < 3; ++a) {
    const double span = region.hi[a] - region.lo[a];
    if (span < 0.0) throw ValidationError("locate_charges: empty region");
    periodic[a] = std::abs(span - 2 * kPi) < 1e-9;
    if (a == region.plane_axis || span == 0.0) {
      n[a] = 1;
      periodic[a] = false;
      continue;
    }
    const int cells = std::max(1, static_cast<int>(std::lround(span / opt.step)));
    n[a] = periodic[a] ? cells : cells + 1;
  }
  auto coord = [&](int a, int i) {
    if (n[a] == 1) return region.lo[a];
    const double span = region.hi[a] - region.lo[a];
    const int cells = periodic[a] ? n[a] : n[a] - 1;
    return region.lo[a] + span * i / cells;
  };
  const std::size_t total = static_cast<std::size_t>(n[0]) * n[1] * n[2];
  std::vector<Vec3> val(total);
  auto flat = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * n[1] + j) * n[2] + k;
  };
  parallel_for(total, [&](std::size_t idx) {
    const int i = static_cast<int>(idx / (n[1] * n[2]));
    const int j = static_cast<int>(idx / n[2] % n[1]);
    const int k = static_cast<int>(idx % n[2]);
    val[idx] = charge_field(Vec3(coord(0, i), coord(1, j), coord(2, k)), p,
                            depth, avg);
  });

  // candidate cells: every component straddles zero over the corners
  std::array<int, 3> cells{};
  for (int a = 0; a < 3; ++a)
    cells[a] = n[a] == 1 ? 1 : (periodic[a] ? n[a] : n[a] - 1);
  std::vector<Vec3> seeds;
  for (int i = 0; i < cells[0]; ++i)
    for (int j = 0; j < cells[1]; ++j)
      for (int k = 0; k < cells[2]; ++k) {
        Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
        bool finite = true;
        for (int c = 0; c < 8; ++c) {
          const int di = n[0] == 1 ? 0 : (c >> 2 & 1);
          const int dj = n[1] == 1 ? 0 : (c >> 1 & 1);
          const int dk = n[2] == 1 ? 0 : (c & 1);
          const Vec3& v = val[flat((i + di) % n[0], (j + dj) % n[1],
                                   (k + dk) % n[2])];
          if (!v.allFinite()) {
            finite = false;
            break;
          }
          lo = lo.cwiseMin(v);
          hi = hi.cwiseMax(v);
        }
        if (!finite) continue;
        if (straddles(lo[0], hi[0]) && straddles(lo[1], hi[1]) &&
            straddles(lo[2], hi[2])) {
          Vec3 c(coord(0, i), coord(1, j), coord(2, k));
          for (int a = 0; a < 3; ++a)
            if (n[a] > 1) c[a] += 0.5 * opt.step;
          seeds.push_back(c);
        }
      }

  std::vector<std::optional<Vec3>> roots(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t s) {
    auto r = newton_zero(seeds[s], p, depth, avg, region.plane_axis,
                         0.5 * opt.step);
    if (!r) return;
    if (periodic_delta(seeds[s], *r).norm() > 1.5 * std::sqrt(3.0) * opt.step)
      return;
    const double h0 = h_vector(*r, p)[0];
    if (std::abs(h0) < 1e-9) return;
    const Vec3 raw = raw_theta_components(*r, depth, avg);
    if (raw.norm() < opt.tolerance) roots[s] = wrap3(*r);
  });

  std::vector<ChargeRecord> out;
  for (const auto& r : roots) {
    if (!r) continue;
    bool dup = false;
    for (const auto& c : out)
      if (periodic_delta(c.location, *r).norm() < opt.dedupe) dup = true;
    if (dup) continue;
    ChargeRecord rec;
    rec.location = *r;
    rec.depth = depth;
    rec.label = charge_label(*r);
    out.push_back(rec);
  }
  std::sort(out.begin(), out.end(), [](const ChargeRecord& a, const ChargeRecord& b) {
    for (int i = 0; i < 3; ++i)
      if (std::abs(a.location[i] - b.location[i]) > 1e-9)
        return a.location[i] < b.location[i];
    return false;
  });
  return out;
}

int charge_value(const Vec3& location, const ModelParams& p, double depth,
                 const DegreeOptions& opt) {
  p.validate();
  if (!(opt.radius > 0.0)) throw ValidationError("charge_value: radius > 0");
  const AverageFn avg = backend(p, opt.averager);
  const TriMesh sphere = icosphere(opt.level);
  std::vector<Vec3> dir(sphere.vertices.size());
  std::vector<int> bad;
  for (std::size_t v = 0; v < dir.size(); ++v) {
    const Vec3 c =
        charge_field(location + opt.radius * sphere.vertices[v], p, depth, avg);
    if (!c.allFinite() || c.norm() == 0.0) {
      bad.push_back(static_cast<int>(v));
      continue;
    }
    dir[v] = c.normalized();
  }
  if (!bad.empty())
    throw IllConditionedError(
        "charge_value: Theta vanishes or is undefined on the sphere", bad);
  NeumaierSum sum;
  for (const auto& f : sphere.faces) sum.add(solid_angle(dir[f[0]], dir[f[1]], dir[f[2]]));
  const double deg = sum.value() / (4.0 * kPi);
  const double rounded = std::round(deg);
  if (std::abs(deg - rounded) >= 0.1) {
    std::ostringstream os;
    os << "charge_value: degree " << deg
       << " is not near an integer; try a smaller sphere radius";
    throw IllConditionedError(os.str(), {});
  }
  return static_cast<int>(rounded);
}

std::optional<bool> raycast_inside(const TriMesh& mesh, const Vec3& point) {
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    for (int e = 0; e < 3; ++e) {
      const Vec3& a = mesh.vertices[t[e]];
      const Vec3& b = mesh.vertices[t[(e + 1) % 3]];
      if ((periodic_delta(a, b) - (b - a)).norm() > 1e-12) return std::nullopt;
    }
  }
  for (const Vec3& v : mesh.vertices)
    if (v.cwiseAbs().maxCoeff() > kPi - 1e-9) return std::nullopt;
  const Vec3 d = Vec3(1.0, 1.3e-3, 1.7e-3).normalized();
  int hits = 0;
  for (const auto& t : mesh.faces) {
    const Vec3& v0 = mesh.vertices[t[0]];
    const Vec3 e1 = mesh.vertices[t[1]] - v0;
    const Vec3 e2 = mesh.vertices[t[2]] - v0;
    const Vec3 pv = d.cross(e2);
    const double det = e1.dot(pv);
    if (std::abs(det) < 1e-15) continue;
    const Vec3 tv = point - v0;
    const double u = tv.dot(pv) / det;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 qv = tv.cross(e1);
    const double w = d.dot(qv) / det;
    if (w < 0.0 || u + w > 1.0) continue;
    if (e2.dot(qv) / det > 0.0) ++hits;
  }
  return hits % 2 == 1;
}

EnclosureReport enclosed_total(const TriMesh& mesh,
                               std::vector<ChargeRecord>& charges,
                               const ModelParams& p) {
  p.validate();
  const double h0_gamma = h_vector(Vec3::Zero(), p)[0];
  if (h0_gamma == 0.0) throw GapClosedError("enclosed_total: h_0(Gamma) = 0");
  EnclosureReport rep;
  const auto inside_first = raycast_inside(mesh, Vec3::Zero());
  int rc_total = 0;
  bool rc_ok = inside_first.has_value() && !mesh.faces.empty();
  for (std::size_t i = 0; i < charges.size(); ++i) {
    ChargeRecord& c = charges[i];
    const double h0 = h_vector(c.location, p)[0];
    if (std::abs(h0) < 1e-9) {
      c.on_bis = true;
      c.enclosed = false;
      rep.ambiguous.push_back(static_cast<int>(i));
      continue;
    }
    c.enclosed = (h0 < 0.0) == (h0_gamma < 0.0);
    if (c.enclosed) rep.total += c.value;
    if (rc_ok) {
      const auto in = raycast_inside(mesh, c.location);
      if (!in) rc_ok = false;
      else if (*in) rc_total += c.value;
    }
  }
  if (rc_ok) rep.raycast_total = rc_total;
  return rep;
}

Segment o1_o8_segment() {
  return {Vec3::Zero(), Vec3::Constant(-kPi), "O1-O8"};
}

Segment o3_o6_segment() {
  return {Vec3(-kPi, -kPi, 0), Vec3(0, 0, -kPi), "O3-O6"};
}

namespace {

struct LineZeros {
  std::vector<double> s;
};

// Zeros of the charge field on the segment. Both preset segments are
// symmetric lines on which the field stays parallel to (1,1,1), so the
// scalar projection carries the zeros; the perpendicular part is checked.
std::vector<double> segment_zeros(const ModelParams& p, double depth,
                                  const Segment& seg, const AverageFn& avg,
                                  int n_scan) {
  const Vec3 u = Vec3::Ones().normalized();
  auto k_at = [&](double s) { return Vec3(seg.a + s * (seg.b - seg.a)); };
  auto phi = [&](double s) { return charge_field(k_at(s), p, depth, avg).dot(u); };
  auto accept = [&](double s) {
    const Vec3 c = charge_field(k_at(s), p, depth, avg);
    return c.allFinite() && c.norm() < 1e-6;
  };
  std::vector<double> ss(n_scan + 1), fs(n_scan + 1);
  for (int i = 0; i <= n_scan; ++i) {
    ss[i] = static_cast<double>(i) / n_scan;
    fs[i] = phi(ss[i]);
  }
  std::vector<double> out;
  for (int i : {0, n_scan})
    if (accept(ss[i])) out.push_back(ss[i]);
  for (int i = 0; i < n_scan; ++i) {
    if (!std::isfinite(fs[i]) || !std::isfinite(fs[i + 1])) continue;
    if ((fs[i] > 0.0) == (fs[i + 1] > 0.0)) continue;
    if (fs[i] == 0.0 || fs[i + 1] == 0.0) continue;  // endpoint zeros handled
    const double r = bisect_root(phi, ss[i], ss[i + 1], 1e-13);
    if (accept(r)) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-9; }),
            out.end());
  return out;
}

TrackSample sample_at(const ModelParams& p, double depth, const Segment& seg,
                      const AverageFn& avg, int n_scan) {
  TrackSample ts;
  ts.depth = depth;
  ts.s = segment_zeros(p, depth, seg, avg, n_scan);
  for (double s : ts.s) {
    const Vec3 k = seg.a + s * (seg.b - seg.a);
    ts.k.push_back(k);
    ts.h0_sign.push_back(h_vector(k, p)[0] > 0.0 ? 1 : -1);
  }
  return ts;
}

int nearest(const std::vector<double>& xs, double x) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(xs.size()); ++i)
    if (best < 0 || std::abs(xs[i] - x) < std::abs(xs[best] - x)) best = i;
  return best;
}

}  // namespace

TrackResult track_charges(const ModelParams& p,
                          const std::vector<double>& depths,
                          const Segment& segment, const TrackOptions& opt) {
  p.validate();
  if (opt.n_scan < 4) throw ValidationError("track_charges: n_scan >= 4");
  const AverageFn avg = backend(p, opt.averager);
  TrackResult out;
  out.samples.resize(depths.size());
  parallel_for(depths.size(), [&](std::size_t i) {
    out.samples[i] = sample_at(p, depths[i], segment, avg, opt.n_scan);
  });

  for (std::size_t i = 0; i + 1 < out.samples.size(); ++i) {
    const TrackSample& A = out.samples[i];
    const TrackSample& B = out.samples[i + 1];
    const long diff = static_cast<long>(B.s.size()) - static_cast<long>(A.s.size());
    if (diff % 2 != 0) {
      std::ostringstream os;
      os << "zero count changes by " << diff << " between m_i = " << A.depth
         << " and " << B.depth << "; not interpolated";
      out.gaps.push_back(os.str());
      continue;
    }
    if (diff != 0) {
      // bisect the depth where the count changes
      double lo = A.depth, hi = B.depth;
      const std::size_t n_lo = A.s.size();
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (segment_zeros(p, mid, segment, avg, opt.n_scan).size() == n_lo)
          lo = mid;
        else
          hi = mid;
      }
      out.annihilations.push_back(0.5 * (lo + hi));
      continue;
    }
    for (std::size_t z = 0; z < A.s.size(); ++z) {
      const int j = nearest(B.s, A.s[z]);
      if (j < 0 || B.h0_sign[j] == A.h0_sign[z]) continue;
      double lo = A.depth, hi = B.depth, s_track = A.s[z];
      const int sign_lo = A.h0_sign[z];
      bool lost = false;
      for (int it = 0; it < 40 && !lost; ++it) {
        const double mid = 0.5 * (lo + hi);
        const TrackSample m = sample_at(p, mid, segment, avg, opt.n_scan);
        const int q = nearest(m.s, s_track);
        if (q < 0) {
          lost = true;
          break;
        }
        s_track = m.s[q];
        if (m.h0_sign[q] == sign_lo)
          lo = mid;
        else
          hi = mid;
      }
      if (lost) {
        out.gaps.push_back("zero lost while refining a BIS crossing");
        continue;
      }
      out.crossings.push_back(0.5 * (lo + hi));
    }
  }
  return out;
}

}  // namespace chiralq
