#pragma once

#include <span>
#include <vector>

#include "lsml/grid.hpp"

namespace lsml {

enum class LevelSetStatus {
  active,
  collapsed,  ///< positive region became empty
  exploded,   ///< positive region filled the volume
};

const char* to_string(LevelSetStatus status);

/// Current level-set iterate. While active, u is the signed distance of its
/// own positive region and band lists every voxel with |u| <= band width.
struct LevelSetState {
  ScalarField u;
  std::vector<Voxel> band;
  int iteration = 0;
  LevelSetStatus status = LevelSetStatus::active;

  bool active() const { return status == LevelSetStatus::active; }
  BoolMask mask() const { return positive_region(u); }
};

/// Builds an active state from a mixed mask (u is redistanced immediately).
LevelSetState make_state(const BoolMask& mask, double band_width);

/// First-order Godunov approximation of |Du| selected by the sign of v, for
/// the motion u_t = v |Du| with u positive inside. One-sided differences use
/// zero-gradient padding at the volume faces.
ScalarField upwind_grad_norm(const ScalarField& u, const ScalarField& v);

/// Same stencil at a single voxel for a given velocity value.
double upwind_grad_norm_at(const ScalarField& u, double v, const Voxel& voxel);

/// safety / max|v|, or safety when max|v| < 1e-12.
double cfl_dt(const ScalarField& v, double safety = 0.9);
/// As above with the maximum restricted to the band voxels.
double cfl_dt(const ScalarField& v, std::span<const Voxel> band, double safety = 0.9);

/// Time step used by step(). The cfl_dt maximum is taken over the front only:
/// voxels next to the zero level (|u| <= 1) whose velocity pushes them across
/// it. The step is then capped so that no band voxel farther out can cross
/// before the front does (cap = safety * min |u| / (|v| |Du|) over those
/// voxels). Falls back to cfl_dt over the band when the front is empty.
double step_dt(const LevelSetState& state, const ScalarField& v, double safety = 0.9);

/// Every voxel with |u| <= band_width in lexicographic order.
std::vector<Voxel> narrow_band(const ScalarField& u, double band_width);

/// One explicit update u += dt v |Du| on the band (dt from step_dt), then redistancing
/// and a fresh band. A state whose positive region empties or fills the
/// volume is flagged and keeps its un-redistanced values.
LevelSetState step(const LevelSetState& state, const ScalarField& v, double band_width,
                   double safety = 0.9);

/// Diagnostic variant that applies the update on every voxel instead of the
/// band, with the time step still from step_dt() of the band. It matches
/// step() only while no off-band velocity is large enough to carry a voxel
/// across zero within that step; segmentation never uses it.
LevelSetState step_full_domain(const LevelSetState& state, const ScalarField& v,
                               double band_width, double safety = 0.9);

}  // namespace lsml
