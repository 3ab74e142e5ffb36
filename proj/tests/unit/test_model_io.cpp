#include <sstream>

#include "doctest.h"
#include "lsml/model_io.hpp"
#include "test_support.hpp"

using namespace lsml;
using namespace lsml::testing;

namespace {

ModelSequence sample_model() {
  ModelSequence m;
  m.config.feature_map = FeatureMap::fm2;
  m.config.sigmas = {0.0, 1.0 / 3.0};
  m.config.band_width = 2.5;
  m.config.cfl_safety = 0.1 * 3;
  m.config.seed = 0xFFFFFFFFFFFFFFFFULL;
  m.config.forest = {.n_trees = 3, .max_features = 7, .min_samples_leaf = 2, .max_depth = 5,
                     .seed = 12};
  m.config.init.sigma = 2.0;
  m.config.init.p_r = 62.5;
  m.config.init.seed_point = Voxel{3, 4, 5};
  m.config.init.invert = true;
  Rng rng(1);
  const std::size_t width = feature_width(FeatureMap::fm2, 2);
  std::vector<double> x, y;
  for (int r = 0; r < 200; ++r) {
    for (std::size_t c = 0; c < width; ++c) x.push_back(uniform01(rng));
    y.push_back(x[static_cast<std::size_t>(r) * width] + 0.1 * uniform01(rng));
  }
  for (int f = 0; f < 2; ++f) {
    ForestParams p = m.config.forest;
    p.seed = derive_seed(5, {static_cast<std::uint64_t>(f)});
    const Forest full = fit_forest(DataView{x, width}, y, p);
    m.importances.push_back(permutation_importance(full, DataView{x, width}, y));
    m.forests.emplace_back(full.params(), full.n_features(), full.trees());
  }
  m.n_star = 1;
  m.val_trace = {0.1, 0.7000000000000001, 0.3};
  return m;
}

std::string bytes_of(const ModelSequence& m) {
  std::ostringstream out;
  write_model(out, m);
  return out.str();
}

}  // namespace

TEST_CASE("model files round-trip byte for byte") {
  const ModelSequence m = sample_model();
  const std::string first = bytes_of(m);
  CHECK(first.rfind("LSMODEL1\nversion 1\nfeature_map fm2\n", 0) == 0);
  std::istringstream in(first);
  const ModelSequence back = read_model(in);
  CHECK(bytes_of(back) == first);
  CHECK(back.val_trace == m.val_trace);
  CHECK(back.config.sigmas == m.config.sigmas);
  CHECK(back.config.seed == m.config.seed);
  CHECK(back.config.init.seed_point == m.config.init.seed_point);
  CHECK(back.importances == m.importances);
  CHECK(back.forests[1].same_model(m.forests[1]));

  ModelSequence plain = m;
  plain.importances.clear();
  plain.config.init.seed_point.reset();
  std::istringstream pin(bytes_of(plain));
  CHECK(bytes_of(read_model(pin)) == bytes_of(plain));
}

TEST_CASE("model readers reject bad input") {
  const std::string good = bytes_of(sample_model());
  auto reject = [](const std::string& bytes) {
    std::istringstream in(bytes);
    CHECK_THROWS_AS(read_model(in), FormatError);
  };
  std::string v2 = good;
  v2.replace(v2.find("version 1"), 9, "version 2");
  reject(v2);
  reject("LSMODEL2\n");
  reject(good.substr(0, good.size() - 5));
  reject(good + "x");
  std::string no_blank = good.substr(0, good.find("\n\n") + 1);
  reject(no_blank);
  std::string bad_star = good;
  bad_star.replace(bad_star.find("n_star 1"), 8, "n_star 9");
  reject(bad_star);
  CHECK_THROWS_AS(read_model(std::filesystem::path("/nonexistent/model.lsmodel")), FormatError);

  ModelSequence inconsistent = sample_model();
  inconsistent.val_trace.pop_back();
  std::ostringstream out;
  CHECK_THROWS_AS(write_model(out, inconsistent), ArgumentError);
}
