#include "lsml/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lsml {

namespace {

void require_same_dims(const ScalarField& a, const ScalarField& b) {
  if (a.dims() != b.dims()) throw DimensionError("level set and velocity dimensions differ");
}

void check_safety(double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw ArgumentError("CFL safety must be in (0, 1]");
}

void check_band_width(double band_width) {
  if (!(band_width >= 1.0) || !std::isfinite(band_width)) {
    throw ArgumentError("band width must be finite and >= 1");
  }
}

}  // namespace

const char* to_string(LevelSetStatus status) {
  switch (status) {
    case LevelSetStatus::active:
      return "active";
    case LevelSetStatus::collapsed:
      return "collapsed";
    case LevelSetStatus::exploded:
      return "exploded";
  }
  return "unknown";
}

double upwind_grad_norm_at(const ScalarField& u, double v, const Voxel& p) {
  const Dims d = u.dims();
  const double c = u.at(p);
  double sum = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    Voxel lo = p;
    Voxel hi = p;
    int& a_lo = axis == 0 ? lo.i : (axis == 1 ? lo.j : lo.k);
    int& a_hi = axis == 0 ? hi.i : (axis == 1 ? hi.j : hi.k);
    const int x = a_lo;
    a_lo = std::max(x - 1, 0);
    a_hi = std::min(x + 1, d[axis] - 1);
    const double back = c - u.at(lo);   // D-
    const double fwd = u.at(hi) - c;    // D+
    double contrib;
    if (v >= 0.0) {
      // Expansion: information arrives from the inside, where u is larger.
      const double a = std::max(fwd, 0.0);
      const double b = std::min(back, 0.0);
      contrib = a * a + b * b;
    } else {
      const double a = std::max(back, 0.0);
      const double b = std::min(fwd, 0.0);
      contrib = a * a + b * b;
    }
    sum += contrib;
  }
  return std::sqrt(sum);
}

ScalarField upwind_grad_norm(const ScalarField& u, const ScalarField& v) {
  require_same_dims(u, v);
  ScalarField out(u.dims());
  for (std::size_t n = 0; n < u.size(); ++n) out[n] = upwind_grad_norm_at(u, v[n], u.voxel(n));
  return out;
}

double cfl_dt(const ScalarField& v, double safety) {
  check_safety(safety);
  double vmax = 0.0;
  for (double x : v.data()) vmax = std::max(vmax, std::abs(x));
  return vmax < 1e-12 ? safety : safety / vmax;
}

double cfl_dt(const ScalarField& v, std::span<const Voxel> band, double safety) {
  check_safety(safety);
  double vmax = 0.0;
  for (const Voxel& p : band) vmax = std::max(vmax, std::abs(v.at(p)));
  return vmax < 1e-12 ? safety : safety / vmax;
}

double step_dt(const LevelSetState& state, const ScalarField& v, double safety) {
  check_safety(safety);
  require_same_dims(state.u, v);
  double front_max = 0.0;
  double cap = std::numeric_limits<double>::infinity();
  for (const Voxel& p : state.band) {
    const double u = state.u.at(p);
    const double vel = v.at(p);
    if (u * vel >= 0.0) continue;  // moving away from the zero level
    if (std::abs(u) <= 1.0) {
      front_max = std::max(front_max, std::abs(vel));
    } else {
      const double rate = std::abs(vel) * upwind_grad_norm_at(state.u, vel, p);
      if (rate > 0.0) cap = std::min(cap, std::abs(u) / rate);
    }
  }
  const double dt = front_max < 1e-12 ? cfl_dt(v, state.band, safety) : safety / front_max;
  return std::min(dt, safety * cap);
}

std::vector<Voxel> narrow_band(const ScalarField& u, double band_width) {
  check_band_width(band_width);
  std::vector<Voxel> band;
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (std::abs(u[n]) <= band_width) band.push_back(u.voxel(n));
  }
  return band;
}

LevelSetState make_state(const BoolMask& mask, double band_width) {
  LevelSetState s;
  s.u = signed_distance(mask);
  s.band = narrow_band(s.u, band_width);
  return s;
}

namespace {

LevelSetState advance(const LevelSetState& state, const ScalarField& v, double band_width,
                      double safety, bool whole_grid) {
  require_same_dims(state.u, v);
  check_band_width(band_width);
  if (!state.active()) return state;

  const double dt = step_dt(state, v, safety);
  ScalarField updated = state.u;
  auto update = [&](const Voxel& p) {
    const double vel = v.at(p);
    if (!std::isfinite(vel)) throw ArgumentError("velocity is not finite");
    updated.at(p) += dt * vel * upwind_grad_norm_at(state.u, vel, p);
  };
  if (whole_grid) {
    for (std::size_t n = 0; n < updated.size(); ++n) update(updated.voxel(n));
  } else {
    for (const Voxel& p : state.band) update(p);
  }

  LevelSetState next;
  next.iteration = state.iteration + 1;
  const BoolMask region = positive_region(updated);
  const std::size_t inside = count_true(region);
  if (inside == 0 || inside == region.size()) {
    next.u = std::move(updated);
    next.band = state.band;
    next.status = inside == 0 ? LevelSetStatus::collapsed : LevelSetStatus::exploded;
    return next;
  }
  next.u = signed_distance(region);
  next.band = narrow_band(next.u, band_width);
  return next;
}

}  // namespace

LevelSetState step(const LevelSetState& state, const ScalarField& v, double band_width,
                   double safety) {
  return advance(state, v, band_width, safety, false);
}

LevelSetState step_full_domain(const LevelSetState& state, const ScalarField& v,
                               double band_width, double safety) {
  return advance(state, v, band_width, safety, true);
}

}  // namespace lsml
