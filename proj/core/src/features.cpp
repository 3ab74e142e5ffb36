#include "lsml/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "lsml/parallel.hpp"

namespace lsml {

namespace {

constexpr double kTiny = 1e-8;

struct ShapeContext {
  BoolMask inside;
  ScalarField dh_norm;  // |D H(u)| with zero-gradient faces
  GlobalShape shape;
};

bool has_opposite_neighbor(const BoolMask& h, const Voxel& v) {
  static constexpr int kOffsets[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0},
                                         {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
  const std::uint8_t self = h.at(v);
  for (const auto& o : kOffsets) {
    const Voxel w{v.i + o[0], v.j + o[1], v.k + o[2]};
    if (h.dims().contains(w.i, w.j, w.k) && h.at(w) != self) return true;
  }
  return false;
}

ShapeContext shape_context(const ScalarField& u) {
  ShapeContext ctx;
  ctx.inside = positive_region(u);
  ctx.dh_norm = central_gradient(to_scalar(ctx.inside), BoundaryMode::zero).norm();

  GlobalShape& gs = ctx.shape;
  const Dims d = u.dims();
  double length = 0.0;
  for (double x : ctx.dh_norm.data()) length += x;
  gs.length = length;

  double volume = 0.0;
  Vec3 s1{};
  Vec3 s2{};
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (!ctx.inside[n]) continue;
    const Vec3 p = to_vec(u.voxel(n));
    volume += 1.0;
    for (std::size_t a = 0; a < 3; ++a) {
      s1[a] += p[a];
      s2[a] += p[a] * p[a];
    }
  }
  gs.volume = volume;
  if (volume == 0.0) {
    gs.degenerate = true;
    gs.com = {(d.ni - 1) / 2.0, (d.nj - 1) / 2.0, (d.nk - 1) / 2.0};
    return ctx;
  }
  for (std::size_t a = 0; a < 3; ++a) {
    gs.moment1[a] = s1[a] / volume;
    gs.moment2[a] = s2[a] / volume;
  }
  gs.com = gs.moment1;
  gs.isoperimetric =
      length > 0.0 ? 36.0 * std::numbers::pi * volume * volume / (length * length * length) : 0.0;

  double sum = 0.0;
  double sum_sq = 0.0;
  double count = 0.0;
  double max = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const Voxel v = u.voxel(n);
    if (!has_opposite_neighbor(ctx.inside, v)) continue;
    const Vec3 p = to_vec(v);
    const double dist = std::hypot(p[0] - gs.com[0], p[1] - gs.com[1], p[2] - gs.com[2]);
    sum += dist;
    sum_sq += dist * dist;
    count += 1.0;
    max = std::max(max, dist);
  }
  if (count > 0.0) {
    gs.dist_mean = sum / count;
    gs.dist_std = std::sqrt(std::max(0.0, sum_sq / count - gs.dist_mean * gs.dist_mean));
    gs.dist_max = max;
  }
  return ctx;
}

GlobalImage image_statistics(const ShapeContext& ctx, const ScalarField& m, const ScalarField& edge) {
  GlobalImage gi;
  const GlobalShape& gs = ctx.shape;
  if (gs.volume > 0.0) {
    double sum = 0.0;
    for (std::size_t n = 0; n < m.size(); ++n) {
      if (ctx.inside[n]) sum += m[n];
    }
    gi.mean_inside = sum / gs.volume;
    double var = 0.0;
    for (std::size_t n = 0; n < m.size(); ++n) {
      if (ctx.inside[n]) {
        const double r = m[n] - gi.mean_inside;
        var += r * r;
      }
    }
    gi.std_inside = std::sqrt(var / gs.volume);
  } else {
    gi.degenerate = true;
  }
  if (gs.length > 0.0) {
    double edge_sum = 0.0;
    double boundary_sum = 0.0;
    for (std::size_t n = 0; n < m.size(); ++n) {
      const double w = ctx.dh_norm[n];
      if (w == 0.0) continue;
      edge_sum += edge[n] * w;
      boundary_sum += m[n] * w;
    }
    gi.avg_edge = edge_sum / gs.length;
    gi.mean_on_boundary = boundary_sum / gs.length;
  } else {
    gi.degenerate = true;
  }
  return gi;
}

SliceAreas areas_of(const BoolMask& inside) {
  const Dims d = inside.dims();
  SliceAreas sa;
  for (int a = 0; a < 3; ++a) {
    sa.area[static_cast<std::size_t>(a)].assign(static_cast<std::size_t>(d[a]), 0.0);
  }
  for (std::size_t n = 0; n < inside.size(); ++n) {
    if (!inside[n]) continue;
    const Voxel v = inside.voxel(n);
    sa.area[0][static_cast<std::size_t>(v.i)] += 1.0;
    sa.area[1][static_cast<std::size_t>(v.j)] += 1.0;
    sa.area[2][static_cast<std::size_t>(v.k)] += 1.0;
  }
  for (std::size_t a = 0; a < 3; ++a) {
    const auto& area = sa.area[a];
    const std::size_t n = area.size();
    auto& change = sa.change[a];
    change.assign(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      // Edge slices replicate their own value for the missing neighbor.
      const double next = x + 1 < n ? area[x + 1] : area[x];
      const double prev = x > 0 ? area[x - 1] : area[x];
      change[x] = 0.5 * std::abs(next - prev);
    }
  }
  return sa;
}

void require_coord(const Dims& d, const Voxel& c) {
  if (!d.contains(c.i, c.j, c.k)) throw ArgumentError("feature coordinate outside the grid");
}

LocalShape shape_at(const GlobalShape& gs, const SliceAreas& sa, const Voxel& c) {
  LocalShape ls;
  const Vec3 p = to_vec(c);
  ls.dist_com = std::hypot(p[0] - gs.com[0], p[1] - gs.com[1], p[2] - gs.com[2]);
  const std::size_t idx[3] = {static_cast<std::size_t>(c.i), static_cast<std::size_t>(c.j),
                              static_cast<std::size_t>(c.k)};
  for (std::size_t a = 0; a < 3; ++a) {
    ls.area[a] = sa.area[a][idx[a]];
    ls.area_change[a] = sa.change[a][idx[a]];
  }
  return ls;
}

// Unit directions toward the inside along the normal and toward the COM.
struct RayDirections {
  double length = 0.0;  // D_m
  Vec3 normal{};
  Vec3 com{};
};

RayDirections ray_directions(const ScalarField& u, const GlobalShape& gs, const Voxel& c) {
  RayDirections r;
  const Vec3 p = to_vec(c);
  const Vec3 to_com = {gs.com[0] - p[0], gs.com[1] - p[1], gs.com[2] - p[2]};
  r.length = std::hypot(to_com[0], to_com[1], to_com[2]);
  if (r.length < kTiny) return r;
  for (std::size_t a = 0; a < 3; ++a) r.com[a] = to_com[a] / r.length;
  const Vec3 g = gradient_at(u, c, BoundaryMode::one_sided);
  const double gn = std::hypot(g[0], g[1], g[2]);
  if (gn < kTiny) {
    r.normal = r.com;
  } else {
    for (std::size_t a = 0; a < 3; ++a) r.normal[a] = g[a] / gn;
  }
  return r;
}

// Writes kRaySamples inward then kRaySamples outward samples.
void sample_ray(const ScalarField& m, const Voxel& c, const RayDirections& r, const Vec3& dir,
                double* in, double* out) {
  if (r.length < kTiny) {
    const double value = m.at(c);
    std::fill(in, in + kRaySamples, value);
    std::fill(out, out + kRaySamples, value);
    return;
  }
  const Vec3 p = to_vec(c);
  for (int t = 1; t <= kRaySamples; ++t) {
    const double s = t * r.length / kRaySamples;
    in[t - 1] = trilinear(m, {p[0] + s * dir[0], p[1] + s * dir[1], p[2] + s * dir[2]});
    out[t - 1] = trilinear(m, {p[0] - s * dir[0], p[1] - s * dir[1], p[2] - s * dir[2]});
  }
}

std::string sigma_tag(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%g", sigma);
  return buf;
}

}  // namespace

const char* to_string(FeatureMap map) { return map == FeatureMap::fm1 ? "fm1" : "fm2"; }

FeatureMap parse_feature_map(const std::string& text) {
  if (text == "fm1" || text == "FM1" || text == "1") return FeatureMap::fm1;
  if (text == "fm2" || text == "FM2" || text == "2") return FeatureMap::fm2;
  throw ArgumentError("unknown feature map '" + text + "'");
}

GlobalShape global_shape(const ScalarField& u) { return shape_context(u).shape; }

GlobalImage global_image(const ScalarField& u, const ScalarField& m_sigma) {
  if (u.dims() != m_sigma.dims()) throw DimensionError("global_image: dimension mismatch");
  const ShapeContext ctx = shape_context(u);
  const ScalarField edge = central_gradient(m_sigma, BoundaryMode::one_sided).norm();
  return image_statistics(ctx, m_sigma, edge);
}

SliceAreas slice_areas(const ScalarField& u) { return areas_of(positive_region(u)); }

LocalShape local_shape(const ScalarField& u, const GlobalShape& gs, const SliceAreas& sa,
                       const Voxel& coord) {
  require_coord(u.dims(), coord);
  return shape_at(gs, sa, coord);
}

LocalImage local_image(const ScalarField& u, const ScalarField& m_sigma, const GlobalShape& gs,
                       const Voxel& coord) {
  if (u.dims() != m_sigma.dims()) throw DimensionError("local_image: dimension mismatch");
  require_coord(u.dims(), coord);
  LocalImage li;
  li.value = m_sigma.at(coord);
  const Vec3 g = gradient_at(m_sigma, coord, BoundaryMode::one_sided);
  li.edge = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
  const RayDirections r = ray_directions(u, gs, coord);
  sample_ray(m_sigma, coord, r, r.normal, li.normal_in.data(), li.normal_out.data());
  sample_ray(m_sigma, coord, r, r.com, li.com_in.data(), li.com_out.data());
  return li;
}

ImageScales::ImageScales(const ScalarField& image, std::vector<double> sigmas)
    : sigmas_(std::move(sigmas)) {
  if (sigmas_.empty()) throw ArgumentError("at least one smoothing scale is required");
  for (double s : sigmas_) {
    smoothed_.push_back(gaussian_smooth(image, s));
    edge_.push_back(central_gradient(smoothed_.back(), BoundaryMode::one_sided).norm());
  }
}

std::size_t feature_width(FeatureMap map, std::size_t n_sigmas) {
  const std::size_t fm1 = 10 + 4 * n_sigmas;
  if (map == FeatureMap::fm1) return fm1;
  return fm1 + n_sigmas + 3 + 6 + 4 * kRaySamples * n_sigmas;
}

std::vector<std::string> feature_names(FeatureMap map, std::span<const double> sigmas) {
  const std::string p = std::string(to_string(map)) + ".";
  std::vector<std::string> names = {p + "volume", p + "length", p + "isoperimetric"};
  for (int order = 1; order <= 2; ++order) {
    for (const char* axis : {"i", "j", "k"}) {
      names.push_back(p + "moment" + std::to_string(order) + "." + axis);
    }
  }
  names.push_back(p + "dist_com");
  for (const char* what : {"mean_inside", "std_inside", "image", "edge"}) {
    for (double s : sigmas) names.push_back(p + what + "." + sigma_tag(s));
  }
  if (map == FeatureMap::fm1) return names;

  for (double s : sigmas) names.push_back(p + "mean_boundary." + sigma_tag(s));
  names.push_back(p + "dist_com_mean");
  names.push_back(p + "dist_com_std");
  names.push_back(p + "dist_com_max");
  for (const char* axis : {"i", "j", "k"}) names.push_back(p + "slice_area." + axis);
  for (const char* axis : {"i", "j", "k"}) names.push_back(p + "slice_area_change." + axis);
  for (const char* ray : {"normal", "com"}) {
    for (double s : sigmas) {
      for (const char* dir : {"in", "out"}) {
        for (int t = 1; t <= kRaySamples; ++t) {
          names.push_back(p + ray + "." + sigma_tag(s) + "." + dir + "." + std::to_string(t));
        }
      }
    }
  }
  return names;
}

FeatureMatrix assemble(const ScalarField& u, const ImageScales& scales, FeatureMap map,
                       std::span<const Voxel> coords) {
  if (coords.empty()) throw ArgumentError("assemble: coordinate list is empty");
  if (u.dims() != scales.dims()) throw DimensionError("assemble: dimension mismatch");
  for (const Voxel& c : coords) require_coord(u.dims(), c);

  const std::size_t ns = scales.count();
  FeatureMatrix fm;
  fm.map = map;
  fm.sigmas = scales.sigmas();
  fm.coords.assign(coords.begin(), coords.end());
  fm.cols = feature_width(map, ns);
  fm.values.assign(fm.rows() * fm.cols, 0.0);

  const ShapeContext ctx = shape_context(u);
  const GlobalShape& gs = ctx.shape;
  std::vector<GlobalImage> gi;
  for (std::size_t s = 0; s < ns; ++s) {
    gi.push_back(image_statistics(ctx, scales.smoothed(s), scales.edge(s)));
  }
  const SliceAreas sa = map == FeatureMap::fm2 ? areas_of(ctx.inside) : SliceAreas{};

  parallel_for(fm.rows(), [&](std::size_t r) {
    const Voxel& c = fm.coords[r];
    double* row = fm.values.data() + r * fm.cols;
    std::size_t col = 0;
    row[col++] = gs.volume;
    row[col++] = gs.length;
    row[col++] = gs.isoperimetric;
    for (std::size_t a = 0; a < 3; ++a) row[col++] = gs.moment1[a];
    for (std::size_t a = 0; a < 3; ++a) row[col++] = gs.moment2[a];
    const Vec3 p = to_vec(c);
    row[col++] = std::hypot(p[0] - gs.com[0], p[1] - gs.com[1], p[2] - gs.com[2]);
    for (std::size_t s = 0; s < ns; ++s) row[col++] = gi[s].mean_inside;
    for (std::size_t s = 0; s < ns; ++s) row[col++] = gi[s].std_inside;
    for (std::size_t s = 0; s < ns; ++s) row[col++] = scales.smoothed(s).at(c);
    for (std::size_t s = 0; s < ns; ++s) row[col++] = scales.edge(s).at(c);
    if (map == FeatureMap::fm1) return;

    for (std::size_t s = 0; s < ns; ++s) row[col++] = gi[s].mean_on_boundary;
    row[col++] = gs.dist_mean;
    row[col++] = gs.dist_std;
    row[col++] = gs.dist_max;
    const LocalShape ls = shape_at(gs, sa, c);
    for (std::size_t a = 0; a < 3; ++a) row[col++] = ls.area[a];
    for (std::size_t a = 0; a < 3; ++a) row[col++] = ls.area_change[a];
    const RayDirections rays = ray_directions(u, gs, c);
    for (std::size_t s = 0; s < ns; ++s) {
      sample_ray(scales.smoothed(s), c, rays, rays.normal, row + col, row + col + kRaySamples);
      col += 2 * kRaySamples;
    }
    for (std::size_t s = 0; s < ns; ++s) {
      sample_ray(scales.smoothed(s), c, rays, rays.com, row + col, row + col + kRaySamples);
      col += 2 * kRaySamples;
    }
  });
  return fm;
}

FeatureMatrix assemble(const ScalarField& u, const ScalarField& image, FeatureMap map,
                       std::span<const Voxel> coords, std::span<const double> sigmas) {
  if (u.dims() != image.dims()) throw DimensionError("assemble: dimension mismatch");
  if (coords.empty()) throw ArgumentError("assemble: coordinate list is empty");
  const ImageScales scales(image, std::vector<double>(sigmas.begin(), sigmas.end()));
  return assemble(u, scales, map, coords);
}

void write_csv(std::ostream& out, const FeatureMatrix& fm) {
  out << "i,j,k";
  for (const auto& name : feature_names(fm.map, fm.sigmas)) out << ',' << name;
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < fm.rows(); ++r) {
    const Voxel& c = fm.coords[r];
    out << c.i << ',' << c.j << ',' << c.k;
    for (double x : fm.row(r)) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace lsml
