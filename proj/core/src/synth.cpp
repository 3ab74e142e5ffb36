#include "lsml/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lsml/rng.hpp"

namespace lsml {

namespace {

constexpr int kLobes = 5;
constexpr double kLobeSharpness = 3.0;

Vec3 random_direction(Rng& rng) {
  const double z = 2.0 * uniform01(rng) - 1.0;
  const double phi = 2.0 * std::numbers::pi * uniform01(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(dot(v, v));
  return {v[0] / n, v[1] / n, v[2] / n};
}

struct RadialShape {
  double radius = 0.0;
  double amplitude = 0.0;
  std::vector<Vec3> lobe_dirs;
  std::vector<double> lobe_weights;

  double at(const Vec3& dir) const {
    double bump = 0.0;
    for (std::size_t l = 0; l < lobe_dirs.size(); ++l) {
      bump += lobe_weights[l] * std::exp(kLobeSharpness * (dot(dir, lobe_dirs[l]) - 1.0));
    }
    return radius * (1.0 + amplitude * std::clamp(bump, -1.0, 1.0));
  }
};

void validate(const PhantomParams& p) {
  const int min_dim = std::min({p.dims.ni, p.dims.nj, p.dims.nk});
  if (min_dim < 8) throw ArgumentError("phantom dimensions must be at least 8");
  if (!(p.radius_min > 0.0) || p.radius_max < p.radius_min) {
    throw ArgumentError("phantom radius range is invalid");
  }
  if (!(p.perturbation >= 0.0 && p.perturbation <= 0.5)) {
    throw ArgumentError("phantom perturbation must be in [0, 0.5]");
  }
  if (p.radius_max * (1.0 + p.perturbation) > min_dim / 2.0 - 2.0) {
    throw ArgumentError("phantom radius exceeds (min dim)/2 - 2");
  }
  if (!(p.noise >= 0.0)) throw ArgumentError("phantom noise must be >= 0");
}

}  // namespace

const char* to_string(PhantomCategory c) {
  switch (c) {
    case PhantomCategory::isolated: return "isolated";
    case PhantomCategory::juxta_wall: return "juxta_wall";
    case PhantomCategory::juxta_vessel: return "juxta_vessel";
    case PhantomCategory::low_contrast: return "low_contrast";
  }
  return "isolated";
}

PhantomCategory parse_category(const std::string& text) {
  for (auto c : {PhantomCategory::isolated, PhantomCategory::juxta_wall,
                 PhantomCategory::juxta_vessel, PhantomCategory::low_contrast}) {
    if (text == to_string(c)) return c;
  }
  throw ArgumentError("unknown phantom category '" + text + "'");
}

Phantom generate(const PhantomParams& params) {
  validate(params);
  Rng rng(derive_seed(params.seed, {}));
  const Dims d = params.dims;
  const Vec3 center = to_vec(center_voxel(d));

  RadialShape shape;
  shape.radius = params.radius_min + (params.radius_max - params.radius_min) * uniform01(rng);
  shape.amplitude = params.perturbation;
  for (int l = 0; l < kLobes; ++l) {
    shape.lobe_dirs.push_back(random_direction(rng));
    shape.lobe_weights.push_back(2.0 * uniform01(rng) - 1.0);
  }
  const Vec3 attach_dir = random_direction(rng);
  const Vec3 tube_dir = normalized(cross(attach_dir, random_direction(rng)));

  BoolMask truth(d, 0);
  for (std::size_t n = 0; n < truth.size(); ++n) {
    const Vec3 p = to_vec(truth.voxel(n));
    const Vec3 rel = {p[0] - center[0], p[1] - center[1], p[2] - center[2]};
    const double dist = std::sqrt(dot(rel, rel));
    if (dist == 0.0) {
      truth[n] = 1;
      continue;
    }
    const Vec3 dir = {rel[0] / dist, rel[1] / dist, rel[2] / dist};
    truth[n] = dist <= shape.at(dir) ? 1 : 0;
  }
  truth = keep_nearest_component(truth, center);

  double contrast = params.contrast;
  if (params.category == PhantomCategory::low_contrast) contrast *= params.low_contrast_factor;

  ScalarField image(d, 0.0);
  const double attach_r = shape.at(attach_dir);
  for (std::size_t n = 0; n < image.size(); ++n) {
    double value = truth[n] ? contrast : 0.0;
    const Vec3 p = to_vec(image.voxel(n));
    const Vec3 rel = {p[0] - center[0], p[1] - center[1], p[2] - center[2]};
    if (params.category == PhantomCategory::juxta_wall) {
      const double h = dot(rel, attach_dir);
      if (h >= attach_r && h <= attach_r + params.wall_thickness) value = std::max(value, contrast);
    } else if (params.category == PhantomCategory::juxta_vessel) {
      const double offset = attach_r + params.vessel_radius;
      const Vec3 q = {rel[0] - offset * attach_dir[0], rel[1] - offset * attach_dir[1],
                      rel[2] - offset * attach_dir[2]};
      const double along = dot(q, tube_dir);
      const double r2 = dot(q, q) - along * along;
      if (r2 <= params.vessel_radius * params.vessel_radius) value = std::max(value, contrast);
    }
    image[n] = value;
  }
  if (params.noise > 0.0) {
    for (std::size_t n = 0; n < image.size(); ++n) image[n] += params.noise * standard_normal(rng);
  }

  Phantom ph;
  ph.image = std::move(image);
  ph.truth = std::move(truth);
  ph.category = params.category;
  ph.radius = shape.radius;
  ph.seed = params.seed;
  return ph;
}

std::uint64_t phantom_seed(std::uint64_t master_seed, int split, std::size_t index) {
  return derive_seed(master_seed, {0x53594E54, static_cast<std::uint64_t>(split), index});
}

Dataset generate_dataset(std::size_t n_train, std::size_t n_val, std::size_t n_test,
                         const PhantomParams& templ, std::uint64_t master_seed,
                         const std::vector<PhantomCategory>& categories) {
  if (categories.empty()) throw ArgumentError("generate_dataset: no categories enabled");
  Dataset ds;
  auto make_split = [&](int split, std::size_t count, std::vector<Phantom>& out) {
    out.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      PhantomParams p = templ;
      p.seed = phantom_seed(master_seed, split, i);
      p.category = categories[i % categories.size()];
      out[i] = generate(p);
    }
  };
  make_split(0, n_train, ds.train);
  make_split(1, n_val, ds.val);
  make_split(2, n_test, ds.test);
  return ds;
}

}  // namespace lsml
