#include <set>

#include "doctest.h"
#include "lsml/grid.hpp"
#include "test_support.hpp"

using namespace lsml;
using namespace lsml::testing;

TEST_CASE("field construction validates dimensions and indexing is k-fastest") {
  CHECK_THROWS_AS(ScalarField(Dims{0, 1, 1}), DimensionError);
  CHECK_THROWS_AS(ScalarField(Dims{2, 2, 2}, std::vector<double>(7)), DimensionError);
  ScalarField f(Dims{2, 3, 4});
  CHECK(f.index(0, 0, 1) == 1);
  CHECK(f.index(0, 1, 0) == 4);
  CHECK(f.index(1, 0, 0) == 12);
  for (std::size_t n = 0; n < f.size(); ++n) CHECK(f.index(f.voxel(n)) == n);
}

TEST_CASE("central_gradient stencils") {
  SUBCASE("linear field 2i") {
    ScalarField f(Dims{5, 4, 3});
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = 2.0 * f.voxel(n).i;
    const VectorField g = central_gradient(f, BoundaryMode::one_sided);
    for (std::size_t n = 0; n < f.size(); ++n) {
      CHECK(g.i[n] == 2.0);
      CHECK(g.j[n] == 0.0);
      CHECK(g.k[n] == 0.0);
    }
  }
  SUBCASE("constant field") {
    const VectorField g = central_gradient(ScalarField(Dims{3, 3, 3}, 7.0), BoundaryMode::zero);
    for (std::size_t n = 0; n < g.i.size(); ++n) CHECK(g.norm()[n] == 0.0);
  }
  SUBCASE("quadratic i^2 on 5^3") {
    ScalarField f(Dims{5, 5, 5});
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = std::pow(f.voxel(n).i, 2);
    const VectorField g = central_gradient(f, BoundaryMode::one_sided);
    CHECK(g.i(2, 1, 1) == 4.0);
    CHECK(g.i(0, 1, 1) == 1.0);
    CHECK(g.i(4, 1, 1) == 16.0 - 9.0);
    const VectorField z = central_gradient(f, BoundaryMode::zero);
    CHECK(z.i(0, 1, 1) == 0.0);
    CHECK(z.i(4, 1, 1) == 0.0);
    CHECK(z.i(2, 1, 1) == 4.0);
  }
  SUBCASE("affine fields are exact in the interior") {
    ScalarField f(Dims{6, 5, 4});
    for (std::size_t n = 0; n < f.size(); ++n) {
      const Voxel v = f.voxel(n);
      f[n] = 1.5 * v.i - 0.25 * v.j + 3.0 * v.k + 2.0;
    }
    const VectorField g = central_gradient(f, BoundaryMode::one_sided);
    for (std::size_t n = 0; n < f.size(); ++n) {
      CHECK(g.i[n] == doctest::Approx(1.5).epsilon(1e-14));
      CHECK(g.j[n] == doctest::Approx(-0.25).epsilon(1e-14));
      CHECK(g.k[n] == doctest::Approx(3.0).epsilon(1e-14));
    }
  }
  SUBCASE("single-voxel gradient matches the field version") {
    const ScalarField f = random_field(Dims{5, 4, 6}, 3);
    for (auto mode : {BoundaryMode::one_sided, BoundaryMode::zero}) {
      const VectorField g = central_gradient(f, mode);
      for (std::size_t n = 0; n < f.size(); ++n) {
        const Vec3 p = gradient_at(f, f.voxel(n), mode);
        CHECK(p[0] == g.i[n]);
        CHECK(p[1] == g.j[n]);
        CHECK(p[2] == g.k[n]);
      }
    }
  }
  CHECK_THROWS_AS(central_gradient(ScalarField(Dims{2, 5, 5}), BoundaryMode::zero),
                  DimensionError);
}

TEST_CASE("gaussian_smooth") {
  const ScalarField f = random_field(Dims{9, 7, 8}, 11);
  CHECK(gaussian_smooth(f, 0.0) == f);
  CHECK_THROWS_AS(gaussian_smooth(f, -1.0), ArgumentError);

  const ScalarField c = gaussian_smooth(ScalarField(Dims{12, 10, 9}, 3.5), 3.0);
  for (double x : c.data()) CHECK(x == doctest::Approx(3.5).epsilon(1e-14));

  ScalarField delta(Dims{21, 21, 21}, 0.0);
  delta(10, 10, 10) = 1.0;
  double sum = 0.0;
  const ScalarField blurred = gaussian_smooth(delta, 1.0);
  for (double x : blurred.data()) sum += x;
  CHECK(std::abs(sum - 1.0) < 1e-9);

  SUBCASE("matches direct 3D convolution") {
    for (double sigma : {0.7, 1.0, 2.0}) {
      const ScalarField a = gaussian_smooth(f, sigma);
      const ScalarField b = brute_gaussian(f, sigma);
      for (std::size_t n = 0; n < f.size(); ++n) CHECK(std::abs(a[n] - b[n]) < 1e-12);
    }
  }
  SUBCASE("linearity") {
    const ScalarField g = random_field(f.dims(), 12);
    ScalarField mix(f.dims());
    for (std::size_t n = 0; n < f.size(); ++n) mix[n] = 2.0 * f[n] - 0.5 * g[n];
    const ScalarField a = gaussian_smooth(mix, 1.5);
    const ScalarField sf = gaussian_smooth(f, 1.5), sg = gaussian_smooth(g, 1.5);
    for (std::size_t n = 0; n < f.size(); ++n) {
      CHECK(std::abs(a[n] - (2.0 * sf[n] - 0.5 * sg[n])) < 1e-9);
    }
  }
}

TEST_CASE("signed_distance") {
  SUBCASE("line mask") {
    BoolMask m(Dims{7, 1, 1}, 0);
    m[2] = m[3] = m[4] = 1;
    const ScalarField d = signed_distance(m);
    const std::vector<double> expect = {-2, -1, 1, 2, 1, -1, -2};
    for (std::size_t n = 0; n < 7; ++n) CHECK(d[n] == expect[n]);
  }
  SUBCASE("single voxel") {
    BoolMask m(Dims{5, 5, 5}, 0);
    m(2, 2, 2) = 1;
    const ScalarField d = signed_distance(m);
    CHECK(d(2, 2, 2) == 1.0);
    CHECK(d(1, 2, 2) == -1.0);
    CHECK(d(3, 2, 2) == -1.0);
    CHECK(d(2, 1, 2) == -1.0);
    CHECK(d(2, 3, 2) == -1.0);
    CHECK(d(2, 2, 1) == -1.0);
    CHECK(d(2, 2, 3) == -1.0);
    CHECK(d(0, 0, 0) == doctest::Approx(-std::sqrt(12.0)).epsilon(1e-15));
  }
  SUBCASE("matches brute force on random masks and keeps the sign") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const Dims d{static_cast<int>(3 + seed % 5), static_cast<int>(4 + seed % 3),
                   static_cast<int>(2 + seed % 4)};
      const BoolMask m = random_mask(d, 0.1 + 0.07 * static_cast<double>(seed), 100 + seed);
      if (count_true(m) == 0 || count_true(m) == m.size()) continue;
      const ScalarField a = signed_distance(m);
      const ScalarField b = brute_signed_distance(m);
      for (std::size_t n = 0; n < m.size(); ++n) {
        CHECK(std::abs(a[n] - b[n]) < 1e-12);
        CHECK((a[n] > 0.0) == (m[n] != 0));
      }
      CHECK(positive_region(a) == m);
    }
  }
  CHECK_THROWS_AS(signed_distance(BoolMask(Dims{3, 3, 3}, 0)), DegenerateMaskError);
  CHECK_THROWS_AS(signed_distance(BoolMask(Dims{3, 3, 3}, 1)), DegenerateMaskError);
  const auto sq = squared_distance_to(BoolMask(Dims{2, 2, 2}, 0));
  for (double x : sq) CHECK(std::isinf(x));
}

TEST_CASE("connected components") {
  BoolMask face(Dims{3, 3, 3}, 0);
  face(1, 1, 1) = face(1, 1, 2) = 1;
  CHECK(connected_components(face).components.size() == 1);

  BoolMask diag(Dims{3, 3, 3}, 0);
  diag(0, 0, 0) = diag(1, 1, 0) = 1;
  CHECK(connected_components(diag).components.size() == 2);

  BoolMask blocks(Dims{10, 4, 4}, 0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        blocks(i + 1, j + 1, k + 1) = 1;
        blocks(i + 6, j + 1, k + 1) = 1;
      }
  const Labeling lab = connected_components(blocks);
  REQUIRE(lab.components.size() == 2);
  const auto a = component_nearest(lab, {1.5, 1.5, 1.5});
  CHECK(lab.labels(1, 1, 1) == a);
  const auto b = component_nearest(lab, {6.5, 1.5, 1.5});
  CHECK(lab.labels(7, 2, 2) == b);
  CHECK(keep_nearest_component(blocks, {6.5, 1.5, 1.5})(1, 1, 1) == 0);
  CHECK(component_nearest(connected_components(BoolMask(Dims{2, 2, 2}, 0)), {0, 0, 0}) == 0);

  SUBCASE("labels partition the mask and are face-connected") {
    const BoolMask m = random_mask(Dims{8, 7, 6}, 0.45, 77);
    const Labeling l = connected_components(m);
    std::size_t total = 0;
    for (const auto& c : l.components) total += c.voxel_count;
    CHECK(total == count_true(m));
    for (std::size_t n = 0; n < m.size(); ++n) {
      CHECK((l.labels[n] != 0) == (m[n] != 0));
      const Voxel v = m.voxel(n);
      if (!m[n]) continue;
      const int nb[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
      for (const auto& o : nb) {
        if (!m.dims().contains(v.i + o[0], v.j + o[1], v.k + o[2])) continue;
        if (m(v.i + o[0], v.j + o[1], v.k + o[2])) {
          CHECK(l.labels(v.i + o[0], v.j + o[1], v.k + o[2]) == l.labels[n]);
        }
      }
    }
  }
}

TEST_CASE("trilinear sampling") {
  const ScalarField f = random_field(Dims{4, 5, 3}, 8);
  for (std::size_t n = 0; n < f.size(); ++n) CHECK(trilinear(f, to_vec(f.voxel(n))) == f[n]);
  ScalarField two(Dims{2, 1, 1});
  two[0] = 0.0;
  two[1] = 10.0;
  CHECK(trilinear(two, {0.5, 0, 0}) == 5.0);
  CHECK(trilinear(f, {-3, 0, 0}) == trilinear(f, {0, 0, 0}));
  CHECK(trilinear(f, {9, 9, 9}) == f(3, 4, 2));
  CHECK_THROWS_AS(trilinear(f, {std::nan(""), 0, 0}), ArgumentError);
}

TEST_CASE("small helpers") {
  CHECK(center_voxel(Dims{41, 41, 41}) == Voxel{20, 20, 20});
  BoolMask m(Dims{2, 2, 2}, 0);
  m[3] = 1;
  CHECK(count_true(m) == 1);
  CHECK(to_scalar(m)[3] == 1.0);
  ScalarField u(Dims{2, 1, 1});
  u[0] = 0.0;
  u[1] = 0.5;
  CHECK(positive_region(u)[0] == 0);
  CHECK(positive_region(u)[1] == 1);
}
