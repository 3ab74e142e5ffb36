#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lsml/grid.hpp"

namespace lsml {

struct InitParams {
  double sigma = 4.0;              ///< smoothing scale of the local threshold
  double p_r = 70.0;               ///< radius percentile in (0, 100]
  int n_rays = 1024;
  std::optional<Voxel> seed_point; ///< defaults to the volume center
  bool invert = false;             ///< dark-on-bright objects
};

/// Seeded initialization: local threshold against the smoothed image, the
/// component nearest the seed, ray-cast radius trimming at the p_r-th
/// percentile, then the nearest component again. Falls back to the seed
/// voxel alone if nothing survives.
BoolMask initialize(const ScalarField& image, const InitParams& params);

/// Deterministic, nearly uniform unit vectors (spherical Fibonacci lattice).
std::vector<Vec3> sphere_directions(int n);

/// Distance along each direction from the seed to the first point where
/// the trilinearly sampled mask drops below 0.5 (0.25-voxel steps).
std::vector<double> ray_radii(const BoolMask& mask, const Vec3& seed,
                              std::span<const Vec3> directions);

struct GridCell {
  double sigma = 0.0;
  double p_r = 0.0;
  double mean_jaccard = 0.0;
};

struct GridSearchResult {
  double sigma = 0.0;
  double p_r = 0.0;
  double score = 0.0;
  std::vector<GridCell> table;  ///< sigma-major, in grid order
};

/// Mean Jaccard of initialize() against the truth for every (sigma, p_r)
/// pair; the best pair wins, ties going to the smaller sigma then p_r.
GridSearchResult grid_search(std::span<const ScalarField> images,
                             std::span<const BoolMask> truths,
                             std::span<const double> sigma_grid,
                             std::span<const double> p_r_grid,
                             const InitParams& base = {});

/// {1, ..., 7} and {50, 55, ..., 80}.
std::vector<double> default_sigma_grid();
std::vector<double> default_p_r_grid();

}  // namespace lsml
