#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chiralq/grid.hpp"
#include "chiralq/mesh.hpp"

namespace chiralq {

// Scalar field of momentum; refine minimizes its absolute value.
using FieldFn = std::function<double(const Vec3&)>;

// |<gamma_0>_q| from the given backend (exact when empty).
FieldFn average_field(const ModelParams& p, const QuenchSpec& q,
                      const AverageFn& averager = {});
// |grid value| with trilinear interpolation.
FieldFn grid_field(const ScalarGrid& grid);

// Triangle seeding: one triangle through the per-axis minima of |grid| along
// the positive k_x, k_y, k_z axes. BisAbsentError when the grid shows no
// band inversion or an axis has no interior minimum.
TriMesh initial_triangle(const ScalarGrid& grid);

// General seeding: locates BIS crossings on the 12 edges of the octant
// cube (sign changes on a signed grid, thresholded minima otherwise),
// polishes each with golden section on `field`, links them into cycles
// through shared cube faces and triangulates every cycle (a triangle for
// three crossings, a fan around a BIS-projected centre otherwise).
TriMesh seed_patch(const ScalarGrid& grid, const FieldFn& field);

struct RefineOptions {
  double bracket = 0.1 * kPi;    // initial half-width of the normal search
  double tolerance = 1e-4 * kPi;
  int max_expansions = 3;        // bracket doublings, capped at edge length
};

// Subdivides every face into four. Each new edge midpoint moves along the
// mean normal of the adjacent faces to the minimizer of |field|; in-plane
// search on octant boundary planes. A midpoint whose minimum stays on the
// bracket edge is kept and flagged.
TriMesh refine(const TriMesh& mesh, const FieldFn& field, int iterations,
               const RefineOptions& opt = {});

// Flips all faces if the majority of face normals point toward decreasing
// `signed_field`.
void orient_toward_increasing(TriMesh& mesh, const FieldFn& signed_field);

// Eight sign reflections of an octant patch, wrapped into [-pi, pi)^3 and
// merged within `merge_tol`. Throws StitchError unless every edge borders
// exactly two faces.
TriMesh reflect_stitch(const TriMesh& octant, double merge_tol = 1e-9);

// max |h_0| over vertices.
double bis_residual(const TriMesh& mesh, const ModelParams& p);
// max |h_0| over vertices and face centroids: how far the piecewise-flat
// surface strays from h_0 = 0.
double surface_residual(const TriMesh& mesh, const ModelParams& p);

enum class FieldSource { kExact, kGrid };

struct BisOptions {
  QuenchSpec quench = QuenchSpec::deep(0);
  double grid_step = 0.1 * kPi;
  double smooth_width = 0.0;  // cells
  int level = 5;
  FieldSource source = FieldSource::kExact;
  RefineOptions refine;
  bool triangle_seed = false;  // initial_triangle instead of seed_patch
  AverageFn averager;       // measurement backend for grid and field
};

struct BisResult {
  ScalarGrid grid;
  TriMesh octant;
  TriMesh mesh;  // stitched, with normals
  double max_residual = 0.0;
  std::size_t flagged = 0;
  std::vector<double> level_residuals;  // octant surface_residual per level
};

BisResult reconstruct_bis(const ModelParams& p, const BisOptions& opt = {});

}  // namespace chiralq
