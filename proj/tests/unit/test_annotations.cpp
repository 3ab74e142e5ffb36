#include <sstream>

#include "doctest.h"
#include "lsml/annotations.hpp"
#include "lsml/eval.hpp"
#include "test_support.hpp"

using namespace lsml;
using namespace lsml::testing;

namespace {

Annotation polygon_on(int k, std::vector<std::array<double, 2>> vertices, std::string id = "r") {
  Annotation a;
  a.reader_id = std::move(id);
  a.slices.push_back({k, std::move(vertices)});
  return a;
}

/// Crossing-number test written independently of the library, with an
/// explicit on-edge check.
bool brute_inside(double px, double py, const std::vector<std::array<double, 2>>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t e = 0; e < n; ++e) {
    const auto& a = poly[e];
    const auto& b = poly[(e + 1) % n];
    const double cross = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
    if (std::abs(cross) < 1e-9 && px >= std::min(a[0], b[0]) - 1e-9 &&
        px <= std::max(a[0], b[0]) + 1e-9 && py >= std::min(a[1], b[1]) - 1e-9 &&
        py <= std::max(a[1], b[1]) + 1e-9) {
      return true;
    }
  }
  int crossings = 0;
  for (std::size_t e = 0; e < n; ++e) {
    const auto& a = poly[e];
    const auto& b = poly[(e + 1) % n];
    if ((a[1] <= py && b[1] > py) || (b[1] <= py && a[1] > py)) {
      const double t = (py - a[1]) / (b[1] - a[1]);
      if (px < a[0] + t * (b[0] - a[0])) ++crossings;
    }
  }
  return crossings % 2 == 1;
}

/// Best mean Jaccard over every subset of the union (union <= 20 voxels).
double brute_best(const std::vector<BoolMask>& masks) {
  std::vector<std::size_t> uni;
  for (std::size_t n = 0; n < masks[0].size(); ++n) {
    for (const auto& m : masks) {
      if (m[n]) {
        uni.push_back(n);
        break;
      }
    }
  }
  double best = -1.0;
  for (std::uint32_t s = 0; s < (1U << uni.size()); ++s) {
    BoolMask b(masks[0].dims(), 0);
    for (std::size_t t = 0; t < uni.size(); ++t) {
      if ((s >> t) & 1U) b[uni[t]] = 1;
    }
    best = std::max(best, mean_jaccard(b, masks));
  }
  return best;
}

}  // namespace

TEST_CASE("rasterize") {
  const Dims d{10, 10, 3};
  const BoolMask sq = rasterize(polygon_on(1, {{2, 2}, {6, 2}, {6, 6}, {2, 6}}), d);
  CHECK(count_true(sq) == 25);
  for (int i = 2; i <= 6; ++i)
    for (int j = 2; j <= 6; ++j) CHECK(sq(i, j, 1) == 1);

  const std::vector<std::array<double, 2>> tri = {{1.2, 0.5}, {8.7, 3.3}, {3.1, 8.9}};
  const BoolMask a = rasterize(polygon_on(0, tri), d);
  const BoolMask b = rasterize(polygon_on(0, {tri[2], tri[1], tri[0]}), d);
  CHECK(a == b);

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::array<double, 2>> poly;
    const int nv = 3 + t % 6;
    for (int v = 0; v < nv; ++v) poly.push_back({9.0 * uniform01(rng), 9.0 * uniform01(rng)});
    const BoolMask m = rasterize(polygon_on(2, poly), d);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) CHECK((m(i, j, 2) != 0) == brute_inside(i, j, poly));
  }

  CHECK(count_true(rasterize(Annotation{}, d)) == 0);
  CHECK_THROWS_AS(rasterize(polygon_on(0, {{1, 1}, {2, 2}}), d), ArgumentError);
  CHECK_THROWS_AS(rasterize(polygon_on(5, tri), d), ArgumentError);
  Annotation unordered = polygon_on(2, tri);
  unordered.slices.push_back({1, tri});
  CHECK_THROWS_AS(rasterize(unordered, d), ArgumentError);
}

TEST_CASE("pairwise distance") {
  const Annotation a = polygon_on(3, {{1, 1}, {4, 1}, {4, 4}});
  CHECK(pairwise_distance(a, a, 1.0) == 0.0);
  const Annotation p = polygon_on(2, {{5, 5}});
  const Annotation q = polygon_on(3, {{5, 5}});
  CHECK(pairwise_distance(p, q, 2.5) == 2.5);
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    Annotation x = polygon_on(static_cast<int>(uniform_index(rng, 5)),
                              {{10 * uniform01(rng), 10 * uniform01(rng)}, {uniform01(rng), 2.0}});
    Annotation y = polygon_on(static_cast<int>(uniform_index(rng, 5)),
                              {{10 * uniform01(rng), 10 * uniform01(rng)}});
    CHECK(pairwise_distance(x, y, 1.7) == pairwise_distance(y, x, 1.7));
  }
  CHECK_THROWS_AS(pairwise_distance(Annotation{}, a, 1.0), ArgumentError);
}

TEST_CASE("clustering") {
  const Annotation a = polygon_on(3, {{1, 1}, {4, 1}, {4, 4}});
  const std::vector<Annotation> two = {a, a};
  const Clustering c2 = cluster(two, 1.0);
  REQUIRE(c2.groups.size() == 1);
  CHECK(c2.groups[0].members.size() == 2);
  CHECK(!c2.warning);

  const std::vector<Annotation> five(5, a);
  const Clustering c5 = cluster(five, 1.0);
  REQUIRE(c5.groups.size() == 1);
  CHECK(c5.groups[0].over_capacity);
  CHECK(c5.warning);
  CHECK(c5.tau == 1e-9);

  std::vector<Annotation> spaced;
  for (int t = 0; t < 4; ++t) spaced.push_back(polygon_on(0, {{10.0 * t, 0}, {10.0 * t, 1}}));
  const Clustering cs = cluster(spaced, 1.0);
  CHECK(cs.groups.size() == 4);

  // Five readers near one object: shrinking tau separates the farthest one.
  std::vector<Annotation> near;
  for (int t = 0; t < 5; ++t) near.push_back(polygon_on(0, {{0.2 * t, 0}, {0.2 * t, 1}}));
  const Clustering cn = cluster(near, 1.0);
  for (const auto& g : cn.groups) CHECK(g.members.size() <= 4);
  CHECK(!cn.warning);
  CHECK(cn.tau < 1.0);

  CHECK_THROWS_AS(cluster(two, 0.0), ArgumentError);
  CHECK_THROWS_AS(cluster(std::vector<Annotation>{}, 1.0), ArgumentError);
}

TEST_CASE("consensus50") {
  const Dims d{2, 2, 1};
  std::vector<BoolMask> masks(4, BoolMask(d, 0));
  masks[0][0] = masks[1][0] = 1;  // 2 of 4
  masks[2][1] = 1;                // 1 of 4
  const BoolMask c = consensus50(masks);
  CHECK(c[0] == 1);
  CHECK(c[1] == 0);
  const BoolMask r = random_mask(Dims{4, 4, 4}, 0.5, 1);
  CHECK(consensus50(std::vector<BoolMask>(3, r)) == r);
  CHECK_THROWS_AS(consensus50(std::vector<BoolMask>{r, BoolMask(d, 0)}), DimensionError);

  SUBCASE("adding a superset of the consensus keeps every consensus voxel") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      std::vector<BoolMask> ms;
      for (std::uint64_t t = 0; t < 3 + s % 3; ++t) {
        ms.push_back(random_mask(Dims{4, 3, 3}, 0.5, 100 * s + t));
      }
      const BoolMask before = consensus50(ms);
      BoolMask extra = random_mask(Dims{4, 3, 3}, 0.3, 999 + s);
      for (std::size_t n = 0; n < extra.size(); ++n) extra[n] |= before[n];
      ms.push_back(extra);
      const BoolMask after = consensus50(ms);
      for (std::size_t n = 0; n < before.size(); ++n) {
        if (before[n]) CHECK(after[n] == 1);
      }
    }
  }
}

TEST_CASE("jaccard median") {
  const BoolMask r = random_mask(Dims{3, 3, 3}, 0.4, 5);
  const std::vector<BoolMask> same(3, r);
  CHECK(jaccard_median(same) == r);
  CHECK(mean_jaccard(jaccard_median(same), same) == 1.0);

  SUBCASE("matches the exhaustive optimum on small unions") {
    Rng rng(2024);
    int instances = 0;
    while (instances < 60) {
      std::vector<BoolMask> masks;
      for (int m = 0; m < 4; ++m) {
        masks.push_back(random_mask(Dims{3, 2, 2}, 0.2 + 0.4 * uniform01(rng), rng()));
      }
      std::size_t uni = 0;
      for (std::size_t n = 0; n < masks[0].size(); ++n) {
        bool any = false;
        for (const auto& m : masks) any = any || m[n];
        uni += any ? 1 : 0;
      }
      if (uni == 0 || uni > 12) continue;
      ++instances;
      const BoolMask med = jaccard_median(masks);
      CHECK(mean_jaccard(med, masks) == brute_best(masks));
      CHECK(mean_jaccard(med, masks) >= mean_jaccard(consensus50(masks), masks));
      for (std::size_t n = 0; n < med.size(); ++n) {
        bool any = false;
        for (const auto& m : masks) any = any || m[n];
        if (med[n]) CHECK(any);
      }
    }
  }
  SUBCASE("large inputs use the heuristic and still beat the consensus") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      std::vector<BoolMask> masks;
      for (int m = 0; m < 4; ++m) {
        masks.push_back(ball(Dims{20, 20, 20}, {10.0 + 0.7 * m, 10, 10.0 - 0.5 * s}, 4 + m % 2));
      }
      CHECK(mean_jaccard(jaccard_median(masks), masks) >=
            mean_jaccard(consensus50(masks), masks));
    }
  }
  CHECK_THROWS_AS(jaccard_median(std::vector<BoolMask>{r}), ArgumentError);
  CHECK_THROWS_AS(jaccard_median(std::vector<BoolMask>(2, BoolMask(Dims{2, 2, 2}, 0))),
                  ArgumentError);
}

TEST_CASE("isotropic resampling") {
  const ScalarField f = random_field(Dims{6, 5, 7}, 4);
  const ScalarField same = resample_isotropic(f, {1, 1, 1}, f.dims());
  for (std::size_t n = 0; n < f.size(); ++n) CHECK(std::abs(same[n] - f[n]) <= 1e-12);

  ScalarField lin(Dims{9, 3, 3});
  for (std::size_t n = 0; n < lin.size(); ++n) lin[n] = 3.0 * lin.voxel(n).i;
  const ScalarField up = resample_isotropic(lin, {2, 1, 1}, Dims{17, 3, 3});
  for (int i = 1; i < 17; ++i) {
    CHECK(up(i, 1, 1) - up(i - 1, 1, 1) == doctest::Approx(1.5).epsilon(1e-12));
  }
  CHECK(up(8, 1, 1) == doctest::Approx(lin(4, 1, 1)).epsilon(1e-12));

  const ScalarField c = resample_isotropic(ScalarField(Dims{4, 4, 4}, 2.5), {1.5, 0.7, 2.5},
                                           Dims{9, 9, 9});
  for (double v : c.data()) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));

  const BoolMask m = random_mask(Dims{5, 6, 4}, 0.5, 9);
  CHECK(resample_mask(m, {1, 1, 1}, m.dims()) == m);
  CHECK_THROWS_AS(resample_isotropic(f, {0, 1, 1}, f.dims()), ArgumentError);
}

TEST_CASE("corpus text format") {
  std::vector<Annotation> anns = {polygon_on(2, {{1.5, 2}, {3, 4.25}, {0.1, 0.3}}, "alice"),
                                  polygon_on(4, {{7, 7}, {8, 7}, {8, 8}}, "bob")};
  anns[1].slices.push_back({5, {{7, 7}, {8, 7}, {8, 8}, {7, 8}}});
  std::ostringstream out;
  write_corpus(out, anns);
  std::istringstream in(out.str());
  const auto back = read_corpus(in);
  CHECK(back == anns);
  std::ostringstream again;
  write_corpus(again, back);
  CHECK(again.str() == out.str());

  std::istringstream bad("annotation x\nslice 1\nv 1 2 3\n");
  CHECK_THROWS_AS(read_corpus(bad), FormatError);
  std::istringstream orphan("v 1 2\n");
  CHECK_THROWS_AS(read_corpus(orphan), FormatError);
  std::istringstream unordered("annotation x\nslice 2\nv 1 2\nslice 1\nv 1 2\n\n");
  CHECK_THROWS_AS(read_corpus(unordered), FormatError);
}

TEST_CASE("simulated readers reproduce the object") {
  const Dims d{31, 31, 31};
  const BoolMask truth = ellipsoid(d, {15, 15, 15}, {8, 6, 5});
  const auto readers = simulate_readers(truth, 4, 0.05, 11);
  REQUIRE(readers.size() == 4);
  std::vector<BoolMask> masks;
  for (const auto& a : readers) {
    masks.push_back(rasterize(a, d));
    CHECK(jaccard(masks.back(), truth) > 0.7);
  }
  const Clustering c = cluster(readers, 1.0);
  CHECK(c.groups.size() == 1);
  CHECK(jaccard(consensus50(masks), truth) > 0.8);
  CHECK(simulate_readers(truth, 4, 0.05, 11) == readers);
}
