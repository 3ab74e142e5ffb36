#include "lsml/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "lsml/parallel.hpp"

namespace lsml {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_gradient_dims(const Dims& d) {
  if (d.ni < 3 || d.nj < 3 || d.nk < 3) {
    throw DimensionError("gradient requires at least 3 voxels along every axis");
  }
}

double axis_difference(const ScalarField& f, const Voxel& v, int axis, BoundaryMode mode) {
  const int n = f.dims()[axis];
  Voxel lo = v;
  Voxel hi = v;
  int& pos = axis == 0 ? lo.i : (axis == 1 ? lo.j : lo.k);
  int& pos_hi = axis == 0 ? hi.i : (axis == 1 ? hi.j : hi.k);
  const int c = pos;
  if (c > 0 && c < n - 1) {
    pos = c - 1;
    pos_hi = c + 1;
    return (f.at(hi) - f.at(lo)) / 2.0;
  }
  if (mode == BoundaryMode::zero) return 0.0;
  if (c == 0) {
    pos_hi = 1;
    return f.at(hi) - f.at(v);
  }
  pos = n - 2;
  return f.at(v) - f.at(lo);
}

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher). Entries equal
// to +inf are not sites; a line without sites stays at +inf.
void distance_1d(std::span<double> f, std::vector<int>& v, std::vector<double>& z,
                 std::vector<double>& out) {
  const int n = static_cast<int>(f.size());
  v.resize(static_cast<std::size_t>(n));
  z.resize(static_cast<std::size_t>(n) + 1);
  out.resize(static_cast<std::size_t>(n));
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[static_cast<std::size_t>(q)] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    const double fq = f[static_cast<std::size_t>(q)] + static_cast<double>(q) * q;
    double s = 0.0;
    while (true) {
      const int p = v[static_cast<std::size_t>(k)];
      s = (fq - (f[static_cast<std::size_t>(p)] + static_cast<double>(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[static_cast<std::size_t>(k)]) {
      // k == 0 and the new parabola dominates everywhere.
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInf);
  } else {
    int j = 0;
    for (int q = 0; q < n; ++q) {
      while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
      const int p = v[static_cast<std::size_t>(j)];
      const double d = q - p;
      out[static_cast<std::size_t>(q)] = d * d + f[static_cast<std::size_t>(p)];
    }
  }
  std::copy(out.begin(), out.end(), f.begin());
}

}  // namespace

ScalarField VectorField::norm() const {
  ScalarField out(i.dims());
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = std::sqrt(i[n] * i[n] + j[n] * j[n] + k[n] * k[n]);
  }
  return out;
}

Vec3 gradient_at(const ScalarField& f, const Voxel& v, BoundaryMode mode) {
  require_gradient_dims(f.dims());
  if (!f.dims().contains(v.i, v.j, v.k)) throw ArgumentError("voxel outside field");
  return {axis_difference(f, v, 0, mode), axis_difference(f, v, 1, mode),
          axis_difference(f, v, 2, mode)};
}

VectorField central_gradient(const ScalarField& f, BoundaryMode mode) {
  require_gradient_dims(f.dims());
  const Dims d = f.dims();
  VectorField g{ScalarField(d), ScalarField(d), ScalarField(d)};
  parallel_for(static_cast<std::size_t>(d.ni), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < d.nj; ++j) {
      for (int k = 0; k < d.nk; ++k) {
        const Voxel v{i, j, k};
        const std::size_t n = f.index(v);
        g.i[n] = axis_difference(f, v, 0, mode);
        g.j[n] = axis_difference(f, v, 1, mode);
        g.k[n] = axis_difference(f, v, 2, mode);
      }
    }
  });
  return g;
}

ScalarField gaussian_smooth(const ScalarField& f, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ArgumentError("gaussian_smooth: sigma must be finite and >= 0");
  }
  if (sigma == 0.0) return f;

  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int t = -radius; t <= radius; ++t) {
    kernel[static_cast<std::size_t>(t + radius)] =
        std::exp(-static_cast<double>(t) * t / (2.0 * sigma * sigma));
  }

  const Dims d = f.dims();
  ScalarField src = f;
  ScalarField dst(d);
  const std::size_t stride[3] = {static_cast<std::size_t>(d.nj) * d.nk,
                                 static_cast<std::size_t>(d.nk), 1};
  for (int axis = 0; axis < 3; ++axis) {
    const int n = d[axis];
    // Lines along `axis` are enumerated by their base index.
    std::vector<std::size_t> bases;
    bases.reserve(d.size() / static_cast<std::size_t>(n));
    for (int i = 0; i < (axis == 0 ? 1 : d.ni); ++i) {
      for (int j = 0; j < (axis == 1 ? 1 : d.nj); ++j) {
        for (int k = 0; k < (axis == 2 ? 1 : d.nk); ++k) bases.push_back(src.index(i, j, k));
      }
    }
    const std::size_t s = stride[axis];
    parallel_for(bases.size(), [&](std::size_t b) {
      const std::size_t base = bases[b];
      for (int x = 0; x < n; ++x) {
        const int lo = std::max(-radius, -x);
        const int hi = std::min(radius, n - 1 - x);
        double acc = 0.0;
        double wsum = 0.0;
        for (int t = lo; t <= hi; ++t) {
          const double w = kernel[static_cast<std::size_t>(t + radius)];
          acc += w * src[base + static_cast<std::size_t>(x + t) * s];
          wsum += w;
        }
        dst[base + static_cast<std::size_t>(x) * s] = acc / wsum;
      }
    });
    std::swap(src, dst);
  }
  return src;
}

std::vector<double> squared_distance_to(const BoolMask& sites) {
  const Dims d = sites.dims();
  std::vector<double> dist(d.size());
  for (std::size_t n = 0; n < dist.size(); ++n) dist[n] = sites[n] ? 0.0 : kInf;

  const std::size_t stride[3] = {static_cast<std::size_t>(d.nj) * d.nk,
                                 static_cast<std::size_t>(d.nk), 1};
  for (int axis = 2; axis >= 0; --axis) {
    const int n = d[axis];
    std::vector<std::size_t> bases;
    for (int i = 0; i < (axis == 0 ? 1 : d.ni); ++i) {
      for (int j = 0; j < (axis == 1 ? 1 : d.nj); ++j) {
        for (int k = 0; k < (axis == 2 ? 1 : d.nk); ++k) bases.push_back(sites.index(i, j, k));
      }
    }
    const std::size_t s = stride[axis];
    parallel_for(bases.size(), [&](std::size_t b) {
      std::vector<double> line(static_cast<std::size_t>(n));
      std::vector<int> v;
      std::vector<double> z;
      std::vector<double> out;
      for (int x = 0; x < n; ++x) line[static_cast<std::size_t>(x)] = dist[bases[b] + x * s];
      distance_1d(line, v, z, out);
      for (int x = 0; x < n; ++x) dist[bases[b] + x * s] = line[static_cast<std::size_t>(x)];
    });
  }
  return dist;
}

ScalarField signed_distance(const BoolMask& m) {
  const std::size_t inside = count_true(m);
  if (inside == 0 || inside == m.size()) {
    throw DegenerateMaskError("signed_distance: mask must contain true and false voxels");
  }
  BoolMask outside(m.dims());
  for (std::size_t n = 0; n < m.size(); ++n) outside[n] = m[n] ? 0 : 1;
  const std::vector<double> to_outside = squared_distance_to(outside);
  const std::vector<double> to_inside = squared_distance_to(m);
  ScalarField out(m.dims());
  for (std::size_t n = 0; n < m.size(); ++n) {
    out[n] = m[n] ? std::sqrt(to_outside[n]) : -std::sqrt(to_inside[n]);
  }
  return out;
}

Labeling connected_components(const BoolMask& m) {
  const Dims d = m.dims();
  Labeling result{LabelField(d, 0), {}};
  std::deque<Voxel> queue;
  std::int32_t next = 0;
  static constexpr int kOffsets[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0},
                                         {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
  for (std::size_t start = 0; start < m.size(); ++start) {
    if (!m[start] || result.labels[start] != 0) continue;
    const std::int32_t label = ++next;
    std::size_t count = 0;
    result.labels[start] = label;
    queue.push_back(m.voxel(start));
    while (!queue.empty()) {
      const Voxel v = queue.front();
      queue.pop_front();
      ++count;
      for (const auto& o : kOffsets) {
        const Voxel w{v.i + o[0], v.j + o[1], v.k + o[2]};
        if (!d.contains(w.i, w.j, w.k)) continue;
        const std::size_t idx = m.index(w);
        if (m[idx] && result.labels[idx] == 0) {
          result.labels[idx] = label;
          queue.push_back(w);
        }
      }
    }
    result.components.push_back({label, count});
  }
  return result;
}

std::int32_t component_nearest(const Labeling& labeling, const Vec3& point) {
  if (labeling.components.empty()) return 0;
  std::vector<double> best(labeling.components.size() + 1, kInf);
  const LabelField& labels = labeling.labels;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const std::int32_t l = labels[n];
    if (l == 0) continue;
    const Voxel v = labels.voxel(n);
    const double di = v.i - point[0];
    const double dj = v.j - point[1];
    const double dk = v.k - point[2];
    const double d2 = di * di + dj * dj + dk * dk;
    if (d2 < best[static_cast<std::size_t>(l)]) best[static_cast<std::size_t>(l)] = d2;
  }
  std::int32_t arg = 0;
  double min = kInf;
  for (const Component& c : labeling.components) {
    if (best[static_cast<std::size_t>(c.label)] < min) {
      min = best[static_cast<std::size_t>(c.label)];
      arg = c.label;
    }
  }
  return arg;
}

BoolMask component_mask(const Labeling& labeling, std::int32_t label) {
  BoolMask out(labeling.labels.dims(), 0);
  if (label == 0) return out;
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = labeling.labels[n] == label ? 1 : 0;
  return out;
}

BoolMask keep_nearest_component(const BoolMask& m, const Vec3& point) {
  const Labeling labeling = connected_components(m);
  return component_mask(labeling, component_nearest(labeling, point));
}

double trilinear(const ScalarField& f, const Vec3& p) {
  if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
    throw ArgumentError("trilinear: non-finite sample position");
  }
  const Dims d = f.dims();
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const int n = d[a];
    const double x = std::clamp(p[static_cast<std::size_t>(a)], 0.0, static_cast<double>(n - 1));
    int b = static_cast<int>(std::floor(x));
    if (b >= n - 1) b = std::max(n - 2, 0);
    base[a] = b;
    frac[a] = n == 1 ? 0.0 : x - b;
  }
  auto value = [&](int di, int dj, int dk) {
    const int i = std::min(base[0] + di, d.ni - 1);
    const int j = std::min(base[1] + dj, d.nj - 1);
    const int k = std::min(base[2] + dk, d.nk - 1);
    return f(i, j, k);
  };
  const double c00 = value(0, 0, 0) * (1 - frac[2]) + value(0, 0, 1) * frac[2];
  const double c01 = value(0, 1, 0) * (1 - frac[2]) + value(0, 1, 1) * frac[2];
  const double c10 = value(1, 0, 0) * (1 - frac[2]) + value(1, 0, 1) * frac[2];
  const double c11 = value(1, 1, 0) * (1 - frac[2]) + value(1, 1, 1) * frac[2];
  const double c0 = c00 * (1 - frac[1]) + c01 * frac[1];
  const double c1 = c10 * (1 - frac[1]) + c11 * frac[1];
  return c0 * (1 - frac[0]) + c1 * frac[0];
}

BoolMask positive_region(const ScalarField& u) {
  BoolMask out(u.dims(), 0);
  for (std::size_t n = 0; n < u.size(); ++n) out[n] = u[n] > 0.0 ? 1 : 0;
  return out;
}

ScalarField to_scalar(const BoolMask& m) {
  ScalarField out(m.dims());
  for (std::size_t n = 0; n < m.size(); ++n) out[n] = m[n] ? 1.0 : 0.0;
  return out;
}

std::size_t count_true(const BoolMask& m) {
  return static_cast<std::size_t>(std::count_if(m.data().begin(), m.data().end(),
                                                [](std::uint8_t b) { return b != 0; }));
}

Voxel center_voxel(const Dims& dims) {
  return {(dims.ni - 1) / 2, (dims.nj - 1) / 2, (dims.nk - 1) / 2};
}

}  // namespace lsml
