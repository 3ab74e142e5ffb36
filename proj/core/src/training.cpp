#include "lsml/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lsml/eval.hpp"
#include "lsml/parallel.hpp"
#include "lsml/rng.hpp"

namespace lsml {

namespace {

constexpr std::uint64_t kSampleStream = 0x53414D50;  // per (iteration, example) sampling
constexpr std::uint64_t kForestStream = 0x46525354;  // per-iteration forest seed

std::vector<Voxel> sample_band(const std::vector<Voxel>& band, std::size_t limit,
                               std::uint64_t seed) {
  if (band.size() <= limit) return band;
  std::vector<std::uint32_t> idx(band.size());
  std::iota(idx.begin(), idx.end(), 0U);
  Rng rng(seed);
  for (std::size_t s = 0; s < limit; ++s) {
    const std::size_t pick = s + uniform_index(rng, band.size() - s);
    std::swap(idx[s], idx[pick]);
  }
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  std::vector<Voxel> out;
  out.reserve(limit);
  for (auto i : idx) out.push_back(band[i]);
  return out;
}

FeatureMatrix example_features(const Example& ex, const TrainConfig& config,
                               std::span<const Voxel> coords, const FeatureAugment& augment) {
  FeatureMatrix fm = assemble(ex.state.u, *ex.scales, config.feature_map, coords);
  if (augment) augment(ex, fm);
  return fm;
}

void advance_example(Example& ex, const ScalarField& v, const TrainConfig& config) {
  ex.state = step(ex.state, v, config.band_width, config.cfl_safety);
  if (ex.state.active()) ex.last_valid = ex.state.mask();
}

}  // namespace

void TrainConfig::validate() const {
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (patience < 1) throw ArgumentError("patience must be >= 1");
  if (samples_per_example < 1) throw ArgumentError("samples_per_example must be >= 1");
  if (!(band_width >= 1.0)) throw ArgumentError("band_width must be >= 1");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ArgumentError("cfl_safety must be in (0, 1]");
  if (sigmas.empty()) throw ArgumentError("at least one smoothing scale is required");
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ArgumentError("smoothing scales must be >= 0");
  }
  if (forest.n_trees < 1) throw ArgumentError("forest needs at least one tree");
  if (forest.min_samples_leaf < 1) throw ArgumentError("min_samples_leaf must be >= 1");
  if (forest.max_features < 0 || forest.max_depth < 0) {
    throw ArgumentError("forest limits must be >= 0");
  }
  if (!(init.p_r > 0.0 && init.p_r <= 100.0)) throw ArgumentError("p_r must be in (0, 100]");
  if (!(init.sigma >= 0.0)) throw ArgumentError("init sigma must be >= 0");
  if (init.n_rays < 32) throw ArgumentError("n_rays must be >= 32");
}

ScalarField standardize(const ScalarField& m) {
  const auto data = m.data();
  if (data.empty() ||
      std::all_of(data.begin(), data.end(), [&](double x) { return x == data.front(); })) {
    throw ArgumentError("cannot standardize a constant image");
  }
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (double x : data) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(data.size()));
  if (!(sd > 0.0) || !std::isfinite(sd)) throw ArgumentError("cannot standardize this image");
  ScalarField out(m.dims());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = (data[n] - mean) / sd;
  return out;
}

ScalarField make_targets(const BoolMask& truth) { return signed_distance(truth); }

Example make_example(const ScalarField& raw_image, const BoolMask& truth, const TrainConfig& config,
                     std::string id, std::string category) {
  if (raw_image.dims() != truth.dims()) throw DimensionError("image and truth dimensions differ");
  Example ex;
  ex.id = std::move(id);
  ex.category = std::move(category);
  ex.image = standardize(raw_image);
  ex.truth = truth;
  ex.target = make_targets(truth);
  ex.last_valid = initialize(ex.image, config.init);
  ex.state = make_state(ex.last_valid, config.band_width);
  ex.scales = std::make_shared<const ImageScales>(ex.image, config.sigmas);
  return ex;
}

Design build_design(std::span<const Example> examples, const TrainConfig& config, int iteration,
                    const FeatureAugment& augment) {
  std::vector<FeatureMatrix> blocks(examples.size());
  std::vector<std::vector<double>> targets(examples.size());
  parallel_for(examples.size(), [&](std::size_t l) {
    const Example& ex = examples[l];
    if (!ex.state.active()) return;
    const auto coords =
        sample_band(ex.state.band, static_cast<std::size_t>(config.samples_per_example),
                    derive_seed(config.seed, {kSampleStream, static_cast<std::uint64_t>(iteration),
                                              static_cast<std::uint64_t>(l)}));
    blocks[l] = example_features(ex, config, coords, augment);
    targets[l].reserve(coords.size());
    for (const Voxel& p : coords) targets[l].push_back(ex.target.at(p));
  });

  Design d;
  bool any = false;
  for (std::size_t l = 0; l < examples.size(); ++l) {
    if (!examples[l].state.active()) continue;
    if (!any) {
      d.cols = blocks[l].cols;
      any = true;
    } else if (blocks[l].cols != d.cols) {
      throw DimensionError("feature widths differ between examples");
    }
    d.x.insert(d.x.end(), blocks[l].values.begin(), blocks[l].values.end());
    d.y.insert(d.y.end(), targets[l].begin(), targets[l].end());
  }
  if (!any || d.y.empty()) throw TrainingError("no active training example to fit");
  return d;
}

Forest fit_iteration(std::span<const Example> examples, const TrainConfig& config, int iteration,
                     const FeatureAugment& augment) {
  const Design d = build_design(examples, config, iteration, augment);
  ForestParams params = config.forest;
  params.seed = derive_seed(config.seed, {kForestStream, static_cast<std::uint64_t>(iteration)});
  return fit_forest(d.view(), d.y, params);
}

VelocitySource forest_velocity(const Forest& forest, const TrainConfig& config,
                               const FeatureAugment& augment) {
  return [&forest, config, augment](const Example& ex, std::span<const Voxel> coords) {
    const FeatureMatrix fm = example_features(ex, config, coords, augment);
    if (fm.cols != forest.n_features()) {
      throw ArgumentError("forest expects " + std::to_string(forest.n_features()) +
                          " features but the feature map has " + std::to_string(fm.cols));
    }
    std::vector<double> v(fm.rows());
    for (std::size_t r = 0; r < fm.rows(); ++r) v[r] = forest.predict(fm.row(r));
    return v;
  };
}

void evolve_all(std::span<Example> examples, const VelocitySource& velocity,
                const TrainConfig& config) {
  parallel_for(examples.size(), [&](std::size_t l) {
    Example& ex = examples[l];
    if (!ex.state.active()) return;
    const std::vector<double> v = velocity(ex, ex.state.band);
    if (v.size() != ex.state.band.size()) throw ArgumentError("velocity length mismatch");
    ScalarField field(ex.state.u.dims(), 0.0);
    for (std::size_t b = 0; b < v.size(); ++b) field.at(ex.state.band[b]) = v[b];
    advance_example(ex, field, config);
  });
}

void evolve_all(std::span<Example> examples, const Forest& forest, const TrainConfig& config,
                const FeatureAugment& augment) {
  evolve_all(examples, forest_velocity(forest, config, augment), config);
}

double mean_jaccard(std::span<const Example> examples) {
  if (examples.empty()) throw ArgumentError("mean_jaccard: no examples");
  double total = 0.0;
  for (const auto& ex : examples) total += jaccard(ex.mask(), ex.truth);
  return total / static_cast<double>(examples.size());
}

ModelSequence train(std::vector<Example> train_set, std::vector<Example> val_set,
                    const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty() || val_set.empty()) {
    throw ArgumentError("training and validation sets must be non-empty");
  }
  auto log = [&](const std::string& msg) {
    if (hooks.log) hooks.log(msg);
  };

  ModelSequence model;
  model.config = config;
  model.val_trace.push_back(mean_jaccard(val_set));
  if (hooks.observer) hooks.observer(0, train_set, val_set);
  log("iteration 0: validation mean Jaccard " + std::to_string(model.val_trace.back()));

  std::size_t best = 0;
  for (int n = 0; n < config.max_iters; ++n) {
    const Design d = build_design(train_set, config, n, hooks.augment);
    ForestParams params = config.forest;
    params.seed = derive_seed(config.seed, {kForestStream, static_cast<std::uint64_t>(n)});
    Forest forest = fit_forest(d.view(), d.y, params);
    if (config.compute_importance) {
      try {
        model.importances.push_back(permutation_importance(forest, d.view(), d.y));
      } catch (const DiagnosticError&) {
        model.importances.push_back(std::vector<double>(d.cols, 0.0));
      }
    }
    evolve_all(train_set, forest, config, hooks.augment);
    evolve_all(val_set, forest, config, hooks.augment);
    model.forests.push_back(Forest(forest.params(), forest.n_features(), forest.trees()));
    model.val_trace.push_back(mean_jaccard(val_set));
    if (hooks.observer) hooks.observer(n + 1, train_set, val_set);
    log("iteration " + std::to_string(n + 1) + ": rows " + std::to_string(d.y.size()) +
        ", validation mean Jaccard " + std::to_string(model.val_trace.back()));

    const std::size_t idx = model.val_trace.size() - 1;
    if (model.val_trace[idx] > model.val_trace[best]) best = idx;
    if (idx - best >= static_cast<std::size_t>(config.patience)) break;
    if (std::none_of(train_set.begin(), train_set.end(),
                     [](const Example& ex) { return ex.state.active(); })) {
      log("every training state has degenerated; stopping");
      break;
    }
  }
  model.n_star = static_cast<int>(best);
  return model;
}

SegmentResult segment(const ModelSequence& model, const ScalarField& image,
                      const LevelSetState& u0, const SegmentOptions& options) {
  const TrainConfig& config = model.config;
  const int steps = options.max_steps < 0 ? model.n_star : options.max_steps;
  if (steps > static_cast<int>(model.forests.size())) {
    throw ArgumentError("model holds fewer forests than requested steps");
  }
  if (u0.u.dims() != image.dims()) throw DimensionError("initial state and image dims differ");

  Example ex;
  ex.image = options.already_standardized ? image : standardize(image);
  ex.state = u0;
  ex.last_valid = u0.mask();
  ex.scales = std::make_shared<const ImageScales>(ex.image, config.sigmas);

  SegmentResult res;
  res.init = ex.last_valid;
  res.masks.push_back(ex.last_valid);
  res.volume_trace.push_back(count_true(ex.last_valid));
  res.status = u0.status;
  for (int n = 0; n < steps && ex.state.active(); ++n) {
    const auto velocity = forest_velocity(model.forests[static_cast<std::size_t>(n)], config,
                                          options.augment);
    std::vector<Voxel> coords;
    if (options.full_domain_velocity) {
      coords.reserve(ex.image.size());
      for (std::size_t i = 0; i < ex.image.size(); ++i) coords.push_back(ex.image.voxel(i));
    } else {
      coords = ex.state.band;
    }
    const std::vector<double> v = velocity(ex, coords);
    ScalarField field(ex.image.dims(), 0.0);
    for (std::size_t c = 0; c < coords.size(); ++c) field.at(coords[c]) = v[c];
    advance_example(ex, field, config);
    res.status = ex.state.status;
    if (!ex.state.active()) break;
    res.masks.push_back(ex.last_valid);
    res.volume_trace.push_back(count_true(ex.last_valid));
  }
  res.mask = ex.last_valid;
  return res;
}

SegmentResult segment(const ModelSequence& model, const ScalarField& image,
                      const SegmentOptions& options) {
  const ScalarField z = options.already_standardized ? image : standardize(image);
  const BoolMask init = initialize(z, model.config.init);
  SegmentOptions opts = options;
  opts.already_standardized = true;
  return segment(model, z, make_state(init, model.config.band_width), opts);
}

}  // namespace lsml
