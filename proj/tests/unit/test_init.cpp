#include "doctest.h"
#include "lsml/eval.hpp"
#include "lsml/init.hpp"
#include "test_support.hpp"

using namespace lsml;
using namespace lsml::testing;

namespace {

ScalarField image_of(const BoolMask& m, double noise, std::uint64_t seed) {
  ScalarField f = to_scalar(m);
  if (noise > 0.0) {
    const ScalarField n = random_field(m.dims(), seed);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += noise * n[i];
  }
  return f;
}

bool six_connected(const BoolMask& m) { return connected_components(m).components.size() <= 1; }

}  // namespace

TEST_CASE("sphere directions are unit, deterministic and spread out") {
  const auto d = sphere_directions(1024);
  REQUIRE(d.size() == 1024);
  Vec3 mean{};
  for (const auto& v : d) {
    CHECK(std::hypot(v[0], v[1], v[2]) == doctest::Approx(1.0).epsilon(1e-12));
    for (int a = 0; a < 3; ++a) mean[a] += v[a] / 1024.0;
  }
  for (int a = 0; a < 3; ++a) CHECK(std::abs(mean[a]) < 0.01);
  CHECK(sphere_directions(1024) == d);
}

TEST_CASE("ray radii of a ball") {
  const Dims dims{41, 41, 41};
  const BoolMask b = ball(dims, {20, 20, 20}, 10);
  const auto dirs = sphere_directions(64);
  for (double r : ray_radii(b, {20, 20, 20}, dirs)) {
    CHECK(r >= 9.5);
    CHECK(r <= 11.0);
  }
}

TEST_CASE("bright ball initialization") {
  const Dims dims{41, 41, 41};
  const BoolMask truth = ball(dims, {20, 20, 20}, 10);
  const BoolMask init = initialize(image_of(truth, 0.0, 0), {.sigma = 4, .p_r = 70});
  CHECK(jaccard(init, truth) >= 0.6);
  CHECK(six_connected(init));
  CHECK(init(20, 20, 20) == 1);
}

TEST_CASE("trimming at the top percentile keeps a centered thresholded ball") {
  const Dims dims{31, 31, 31};
  // Image whose local threshold is exactly a ball: values decrease with radius.
  ScalarField img(dims);
  for (std::size_t n = 0; n < img.size(); ++n) {
    const Vec3 p = to_vec(img.voxel(n));
    const double r = std::hypot(p[0] - 15, p[1] - 15, p[2] - 15);
    img[n] = r <= 6.0 ? 1.0 : 0.0;
  }
  const BoolMask thresholded = keep_nearest_component(
      [&] {
        BoolMask m(dims, 0);
        const ScalarField s = gaussian_smooth(img, 2.0);
        for (std::size_t n = 0; n < m.size(); ++n) m[n] = img[n] > s[n] ? 1 : 0;
        return m;
      }(),
      {15, 15, 15});
  const BoolMask out = initialize(img, {.sigma = 2, .p_r = 100});
  CHECK(out == thresholded);
}

TEST_CASE("nearest component wins and other blobs are removed") {
  const Dims dims{41, 41, 41};
  BoolMask two = ball(dims, {12, 20, 20}, 5);
  const BoolMask other = ball(dims, {30, 20, 20}, 5);
  for (std::size_t n = 0; n < two.size(); ++n) two[n] |= other[n];
  const BoolMask out =
      initialize(image_of(two, 0.0, 0), {.sigma = 3, .p_r = 70, .seed_point = Voxel{12, 20, 20}});
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (other[n]) CHECK(out[n] == 0);
  }
  CHECK(out(12, 20, 20) == 1);
}

TEST_CASE("p_r monotonicity and determinism") {
  const Dims dims{41, 41, 41};
  const BoolMask truth = ellipsoid(dims, {20, 20, 20}, {10, 7, 5});
  const ScalarField img = image_of(truth, 0.2, 5);
  BoolMask prev;
  for (double p : {50.0, 60.0, 70.0, 80.0, 100.0}) {
    const BoolMask m = initialize(img, {.sigma = 4, .p_r = p});
    CHECK(six_connected(m));
    if (!prev.empty()) {
      for (std::size_t n = 0; n < m.size(); ++n) {
        if (prev[n]) CHECK(m[n] == 1);
      }
    }
    prev = m;
  }
  CHECK(initialize(img, {}) == initialize(img, {}));
}

TEST_CASE("fallback and argument checks") {
  const Dims dims{15, 15, 15};
  ScalarField img(dims, 0.0);
  img(0, 0, 0) = 1.0;
  const BoolMask out = initialize(img, {.sigma = 1, .p_r = 70});
  CHECK(count_true(out) >= 1);
  CHECK(six_connected(out));
  CHECK_THROWS_AS(initialize(ScalarField(dims, 1.0), {}), ArgumentError);
  CHECK_THROWS_AS(initialize(img, {.p_r = 0.0}), ArgumentError);
  CHECK_THROWS_AS(initialize(img, {.n_rays = 8}), ArgumentError);
}

TEST_CASE("inverted contrast") {
  const Dims dims{41, 41, 41};
  const BoolMask truth = ball(dims, {20, 20, 20}, 9);
  ScalarField dark = to_scalar(truth);
  for (auto& v : dark.data()) v = 1.0 - v;
  const BoolMask out = initialize(dark, {.invert = true});
  CHECK(jaccard(out, truth) >= 0.6);
}

TEST_CASE("grid search") {
  const Dims dims{31, 31, 31};
  std::vector<ScalarField> images;
  std::vector<BoolMask> truths;
  for (int e = 0; e < 2; ++e) {
    truths.push_back(ball(dims, {15, 15, 15}, 6.0 + e));
    images.push_back(image_of(truths.back(), 0.1, 10 + static_cast<std::uint64_t>(e)));
  }
  const std::vector<double> s1 = {3.0}, p1 = {70.0};
  const GridSearchResult single = grid_search(images, truths, s1, p1);
  CHECK(single.sigma == 3.0);
  CHECK(single.p_r == 70.0);
  REQUIRE(single.table.size() == 1);

  const std::vector<double> sg = {1.0, 2.0, 3.0}, pg = {50.0, 75.0, 100.0};
  const GridSearchResult full = grid_search(images, truths, sg, pg);
  REQUIRE(full.table.size() == 9);
  double best = -1.0;
  for (const auto& c : full.table) {
    double mean = 0.0;
    for (std::size_t e = 0; e < images.size(); ++e) {
      mean += jaccard(initialize(images[e], {.sigma = c.sigma, .p_r = c.p_r}), truths[e]);
    }
    mean /= 2.0;
    CHECK(c.mean_jaccard == doctest::Approx(mean).epsilon(1e-14));
    best = std::max(best, c.mean_jaccard);
  }
  CHECK(full.score == best);
  for (const auto& c : full.table) {
    if (c.mean_jaccard == best) {
      CHECK(c.sigma == full.sigma);
      CHECK(c.p_r == full.p_r);
      break;
    }
  }
  CHECK(full.table[0].sigma == 1.0);
  CHECK(full.table[1].p_r == 75.0);

  // A cell constructed to score exactly 1: the truth is that cell's output.
  std::vector<BoolMask> exact;
  for (const auto& img : images) exact.push_back(initialize(img, {.sigma = 2, .p_r = 75}));
  const GridSearchResult hit = grid_search(images, exact, sg, pg);
  CHECK(hit.score == 1.0);
  CHECK(jaccard(initialize(images[0], {.sigma = hit.sigma, .p_r = hit.p_r}), exact[0]) == 1.0);

  CHECK(default_sigma_grid().size() == 7);
  CHECK(default_p_r_grid() == std::vector<double>{50, 55, 60, 65, 70, 75, 80});
  CHECK_THROWS_AS(grid_search(std::span<const ScalarField>{}, std::span<const BoolMask>{}, sg, pg),
                  ArgumentError);
  CHECK_THROWS_AS(grid_search(images, truths, std::span<const double>{}, pg), ArgumentError);
}
