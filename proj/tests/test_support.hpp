#pragma once

// Shared fixtures and brute-force reference implementations for the tests.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lsml/grid.hpp"
#include "lsml/rng.hpp"

namespace lsml::testing {

inline BoolMask ball(const Dims& d, const Vec3& c, double r) {
  BoolMask m(d, 0);
  for (std::size_t n = 0; n < m.size(); ++n) {
    const Vec3 p = to_vec(m.voxel(n));
    const double dx = p[0] - c[0], dy = p[1] - c[1], dz = p[2] - c[2];
    m[n] = dx * dx + dy * dy + dz * dz <= r * r ? 1 : 0;
  }
  return m;
}

inline BoolMask ellipsoid(const Dims& d, const Vec3& c, const Vec3& radii) {
  BoolMask m(d, 0);
  for (std::size_t n = 0; n < m.size(); ++n) {
    const Vec3 p = to_vec(m.voxel(n));
    double s = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double t = (p[a] - c[a]) / radii[a];
      s += t * t;
    }
    m[n] = s <= 1.0 ? 1 : 0;
  }
  return m;
}

inline BoolMask random_mask(const Dims& d, double p_true, std::uint64_t seed) {
  Rng rng(seed);
  BoolMask m(d, 0);
  for (std::size_t n = 0; n < m.size(); ++n) m[n] = uniform01(rng) < p_true ? 1 : 0;
  return m;
}

inline ScalarField random_field(const Dims& d, std::uint64_t seed) {
  Rng rng(seed);
  ScalarField f(d, 0.0);
  for (std::size_t n = 0; n < f.size(); ++n) f[n] = standard_normal(rng);
  return f;
}

/// O(N^2) signed distance: nearest voxel of the opposite label.
inline ScalarField brute_signed_distance(const BoolMask& m) {
  ScalarField out(m.dims(), 0.0);
  for (std::size_t a = 0; a < m.size(); ++a) {
    const Vec3 pa = to_vec(m.voxel(a));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < m.size(); ++b) {
      if (m[b] == m[a]) continue;
      const Vec3 pb = to_vec(m.voxel(b));
      const double dx = pa[0] - pb[0], dy = pa[1] - pb[1], dz = pa[2] - pb[2];
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    out[a] = m[a] ? std::sqrt(best) : -std::sqrt(best);
  }
  return out;
}

/// Direct 3D convolution with a truncated, border-renormalized separable kernel.
inline ScalarField brute_gaussian(const ScalarField& f, double sigma) {
  if (sigma == 0.0) return f;
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  for (int t = -radius; t <= radius; ++t) {
    w[static_cast<std::size_t>(t + radius)] = std::exp(-0.5 * t * t / (sigma * sigma));
  }
  const Dims d = f.dims();
  ScalarField out(d, 0.0);
  for (std::size_t n = 0; n < f.size(); ++n) {
    const Voxel v = f.voxel(n);
    double acc = 0.0, wi = 0.0, wj = 0.0, wk = 0.0;
    for (int a = -radius; a <= radius; ++a) {
      if (d.contains(v.i + a, 0, 0)) wi += w[static_cast<std::size_t>(a + radius)];
      if (d.contains(0, v.j + a, 0)) wj += w[static_cast<std::size_t>(a + radius)];
      if (d.contains(0, 0, v.k + a)) wk += w[static_cast<std::size_t>(a + radius)];
    }
    for (int a = -radius; a <= radius; ++a) {
      for (int b = -radius; b <= radius; ++b) {
        for (int c = -radius; c <= radius; ++c) {
          if (!d.contains(v.i + a, v.j + b, v.k + c)) continue;
          acc += w[static_cast<std::size_t>(a + radius)] * w[static_cast<std::size_t>(b + radius)] *
                 w[static_cast<std::size_t>(c + radius)] * f(v.i + a, v.j + b, v.k + c);
        }
      }
    }
    out[n] = acc / (wi * wj * wk);
  }
  return out;
}

inline double brute_jaccard(const BoolMask& a, const BoolMask& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    inter += (a[n] && b[n]) ? 1 : 0;
    uni += (a[n] || b[n]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace lsml::testing
