#include "lsml/init.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lsml/eval.hpp"
#include "lsml/parallel.hpp"

namespace lsml {

namespace {

constexpr double kRayStep = 0.25;

void validate(const InitParams& p, const Dims& d) {
  if (!(p.sigma >= 0.0) || !std::isfinite(p.sigma)) throw ArgumentError("init: sigma must be >= 0");
  if (!(p.p_r > 0.0 && p.p_r <= 100.0)) throw ArgumentError("init: p_r must be in (0, 100]");
  if (p.n_rays < 32) throw ArgumentError("init: n_rays must be >= 32");
  if (p.seed_point && !d.contains(p.seed_point->i, p.seed_point->j, p.seed_point->k)) {
    throw ArgumentError("init: seed point outside the image");
  }
}

void require_non_constant(const ScalarField& m) {
  const auto [lo, hi] = std::minmax_element(m.data().begin(), m.data().end());
  if (*lo == *hi) throw ArgumentError("init: image is constant");
}

Vec3 seed_of(const InitParams& p, const Dims& d) {
  return to_vec(p.seed_point.value_or(center_voxel(d)));
}

// Thresholded image restricted to the component nearest the seed.
BoolMask threshold_component(const ScalarField& m, double sigma, bool invert, const Vec3& seed) {
  const ScalarField smooth = gaussian_smooth(m, sigma);
  BoolMask b(m.dims(), 0);
  for (std::size_t n = 0; n < m.size(); ++n) {
    b[n] = (invert ? m[n] < smooth[n] : m[n] > smooth[n]) ? 1 : 0;
  }
  return keep_nearest_component(b, seed);
}

BoolMask trim(const BoolMask& component, const Vec3& seed, double radius) {
  BoolMask out(component.dims(), 0);
  const double r2 = radius * radius;
  for (std::size_t n = 0; n < component.size(); ++n) {
    if (!component[n]) continue;
    const Vec3 p = to_vec(component.voxel(n));
    const double d2 = (p[0] - seed[0]) * (p[0] - seed[0]) + (p[1] - seed[1]) * (p[1] - seed[1]) +
                      (p[2] - seed[2]) * (p[2] - seed[2]);
    if (d2 <= r2) out[n] = 1;
  }
  BoolMask kept = keep_nearest_component(out, seed);
  if (count_true(kept) == 0) {
    const Voxel s{static_cast<int>(std::lround(seed[0])), static_cast<int>(std::lround(seed[1])),
                  static_cast<int>(std::lround(seed[2]))};
    kept.at(s) = 1;
  }
  return kept;
}

}  // namespace

std::vector<Vec3> sphere_directions(int n) {
  if (n < 1) throw ArgumentError("sphere_directions: n must be positive");
  std::vector<Vec3> dirs(static_cast<std::size_t>(n));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int q = 0; q < n; ++q) {
    const double z = 1.0 - (2.0 * q + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * q;
    dirs[static_cast<std::size_t>(q)] = {r * std::cos(phi), r * std::sin(phi), z};
  }
  return dirs;
}

std::vector<double> ray_radii(const BoolMask& mask, const Vec3& seed,
                              std::span<const Vec3> directions) {
  const ScalarField field = to_scalar(mask);
  const Dims d = mask.dims();
  std::vector<double> radii(directions.size(), 0.0);
  for (std::size_t q = 0; q < directions.size(); ++q) {
    const Vec3& dir = directions[q];
    double r = 0.0;
    while (true) {
      const Vec3 p = {seed[0] + r * dir[0], seed[1] + r * dir[1], seed[2] + r * dir[2]};
      const bool outside = p[0] < 0.0 || p[1] < 0.0 || p[2] < 0.0 || p[0] > d.ni - 1 ||
                           p[1] > d.nj - 1 || p[2] > d.nk - 1;
      if (outside || trilinear(field, p) < 0.5) break;
      r += kRayStep;
    }
    radii[q] = r;
  }
  return radii;
}

BoolMask initialize(const ScalarField& image, const InitParams& params) {
  validate(params, image.dims());
  require_non_constant(image);
  const Vec3 seed = seed_of(params, image.dims());
  const BoolMask component = threshold_component(image, params.sigma, params.invert, seed);
  const std::vector<Vec3> dirs = sphere_directions(params.n_rays);
  const std::vector<double> radii = ray_radii(component, seed, dirs);
  return trim(component, seed, percentile(radii, params.p_r));
}

GridSearchResult grid_search(std::span<const ScalarField> images, std::span<const BoolMask> truths,
                             std::span<const double> sigma_grid, std::span<const double> p_r_grid,
                             const InitParams& base) {
  if (images.empty() || sigma_grid.empty() || p_r_grid.empty()) {
    throw ArgumentError("grid_search: empty dataset or grid");
  }
  if (images.size() != truths.size()) throw ArgumentError("grid_search: images/truths mismatch");
  for (std::size_t n = 0; n < images.size(); ++n) {
    if (images[n].dims() != truths[n].dims()) throw DimensionError("grid_search: dims mismatch");
    require_non_constant(images[n]);
  }
  for (double s : sigma_grid) {
    InitParams p = base;
    p.sigma = s;
    for (double pr : p_r_grid) {
      p.p_r = pr;
      validate(p, images.front().dims());
    }
  }

  const std::vector<Vec3> dirs = sphere_directions(base.n_rays);
  GridSearchResult result;
  // scores[s][p][example]
  std::vector<std::vector<std::vector<double>>> scores(
      sigma_grid.size(),
      std::vector<std::vector<double>>(p_r_grid.size(), std::vector<double>(images.size())));
  for (std::size_t s = 0; s < sigma_grid.size(); ++s) {
    parallel_for(images.size(), [&](std::size_t e) {
      const Vec3 seed = seed_of(base, images[e].dims());
      const BoolMask component = threshold_component(images[e], sigma_grid[s], base.invert, seed);
      const std::vector<double> radii = ray_radii(component, seed, dirs);
      for (std::size_t p = 0; p < p_r_grid.size(); ++p) {
        const BoolMask mask = trim(component, seed, percentile(radii, p_r_grid[p]));
        scores[s][p][e] = jaccard(mask, truths[e]);
      }
    });
  }
  bool first = true;
  for (std::size_t s = 0; s < sigma_grid.size(); ++s) {
    for (std::size_t p = 0; p < p_r_grid.size(); ++p) {
      double sum = 0.0;
      for (double v : scores[s][p]) sum += v;
      const double mean = sum / static_cast<double>(images.size());
      result.table.push_back({sigma_grid[s], p_r_grid[p], mean});
      const bool better = mean > result.score ||
                          (mean == result.score &&
                           (sigma_grid[s] < result.sigma ||
                            (sigma_grid[s] == result.sigma && p_r_grid[p] < result.p_r)));
      if (first || better) {
        result.sigma = sigma_grid[s];
        result.p_r = p_r_grid[p];
        result.score = mean;
        first = false;
      }
    }
  }
  return result;
}

std::vector<double> default_sigma_grid() { return {1, 2, 3, 4, 5, 6, 7}; }

std::vector<double> default_p_r_grid() { return {50, 55, 60, 65, 70, 75, 80}; }

}  // namespace lsml
