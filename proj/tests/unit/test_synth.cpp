#include <map>
#include <set>

#include "doctest.h"
#include "lsml/eval.hpp"
#include "lsml/features.hpp"
#include "lsml/init.hpp"
#include "lsml/synth.hpp"
#include "test_support.hpp"

using namespace lsml;
using namespace lsml::testing;

TEST_CASE("unperturbed noiseless phantom is an exact ball with two intensities") {
  PhantomParams p;
  p.perturbation = 0.0;
  p.noise = 0.0;
  p.seed = 4;
  const Phantom ph = generate(p);
  CHECK(ph.truth == ball(p.dims, to_vec(center_voxel(p.dims)), ph.radius));
  std::set<double> values(ph.image.data().begin(), ph.image.data().end());
  CHECK(values == std::set<double>{0.0, 1.0});
  CHECK(ph.radius >= 6.0);
  CHECK(ph.radius <= 12.0);
}

TEST_CASE("generation is deterministic and seed-dependent") {
  PhantomParams p;
  p.seed = 99;
  p.category = PhantomCategory::juxta_vessel;
  const Phantom a = generate(p), b = generate(p);
  CHECK(a.image == b.image);
  CHECK(a.truth == b.truth);
  p.seed = 100;
  CHECK(!(generate(p).image == a.image));
}

TEST_CASE("ground truth is connected and contains the center") {
  for (std::uint64_t s = 0; s < 12; ++s) {
    PhantomParams p;
    p.seed = s;
    p.perturbation = 0.5;
    p.radius_max = 11.0;
    p.category = static_cast<PhantomCategory>(s % 4);
    const Phantom ph = generate(p);
    CHECK(ph.truth.at(center_voxel(p.dims)) == 1);
    CHECK(connected_components(ph.truth).components.size() == 1);
  }
}

TEST_CASE("categories change the image, not the truth") {
  PhantomParams p;
  p.seed = 7;
  p.noise = 0.0;
  const Phantom iso = generate(p);
  for (auto cat : {PhantomCategory::juxta_wall, PhantomCategory::juxta_vessel}) {
    p.category = cat;
    const Phantom ph = generate(p);
    CHECK(ph.truth == iso.truth);
    std::size_t bright_outside = 0;
    for (std::size_t n = 0; n < ph.image.size(); ++n) {
      if (!ph.truth[n] && ph.image[n] > 0.5) ++bright_outside;
    }
    CHECK(bright_outside > 20);
  }
  p.category = PhantomCategory::low_contrast;
  const Phantom low = generate(p);
  CHECK(low.truth == iso.truth);
  CHECK(*std::max_element(low.image.data().begin(), low.image.data().end()) ==
        doctest::Approx(0.35));
}

TEST_CASE("parameter validation") {
  PhantomParams p;
  p.radius_max = 16.0;
  CHECK_THROWS_AS(generate(p), ArgumentError);
  p = {};
  p.noise = -1.0;
  CHECK_THROWS_AS(generate(p), ArgumentError);
  p = {};
  p.perturbation = 0.7;
  CHECK_THROWS_AS(generate(p), ArgumentError);
  CHECK(parse_category("juxta_wall") == PhantomCategory::juxta_wall);
  CHECK_THROWS_AS(parse_category("pleural"), ArgumentError);
}

TEST_CASE("noiseless phantoms initialize well") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    PhantomParams p;
    p.noise = 0.0;
    p.seed = s;
    const Phantom ph = generate(p);
    CHECK(jaccard(initialize(ph.image, {}), ph.truth) >= 0.6);
  }
}

TEST_CASE("unperturbed phantoms have ball-like isoperimetric ratios") {
  // Reference band measured on digitized balls of the same radii.
  for (std::uint64_t s = 0; s < 4; ++s) {
    PhantomParams p;
    p.perturbation = 0.0;
    p.radius_min = 8.0;
    p.seed = s;
    const GlobalShape gs = global_shape(signed_distance(generate(p).truth));
    CHECK(gs.isoperimetric >= 0.75);
    CHECK(gs.isoperimetric <= 0.85);
  }
}

TEST_CASE("datasets") {
  PhantomParams p;
  p.dims = {21, 21, 21};
  p.radius_min = 3;
  p.radius_max = 6;
  const Dataset ds = generate_dataset(40, 10, 10, p, 2024);
  CHECK(ds.train.size() == 40);
  std::set<std::uint64_t> seeds;
  for (const auto* split : {&ds.train, &ds.val, &ds.test}) {
    for (const auto& ph : *split) seeds.insert(ph.seed);
  }
  CHECK(seeds.size() == 60);

  const Dataset thirty = generate_dataset(30, 1, 1, p, 5);
  std::map<PhantomCategory, int> hist;
  for (const auto& ph : thirty.train) ++hist[ph.category];
  CHECK(hist.size() == 3);
  for (const auto& [cat, n] : hist) CHECK(n == 10);

  const Dataset again = generate_dataset(40, 10, 10, p, 2024);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(again.val[i].image == ds.val[i].image);
    CHECK(again.test[i].truth == ds.test[i].truth);
  }
  CHECK_THROWS_AS(generate_dataset(1, 1, 1, p, 1, {}), ArgumentError);
}
