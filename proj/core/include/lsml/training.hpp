#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lsml/features.hpp"
#include "lsml/forest.hpp"
#include "lsml/grid.hpp"
#include "lsml/init.hpp"
#include "lsml/levelset.hpp"

namespace lsml {

struct TrainConfig {
  FeatureMap feature_map = FeatureMap::fm1;
  std::vector<double> sigmas = default_sigmas();
  int max_iters = 60;
  int patience = 5;
  int samples_per_example = 5000;
  double band_width = 3.0;
  double cfl_safety = 0.9;
  ForestParams forest;  ///< forest.seed is replaced by a per-iteration seed
  std::uint64_t seed = 0;
  bool compute_importance = true;
  InitParams init;  ///< initialization applied to every image

  /// Throws ArgumentError when a field is out of range.
  void validate() const;
};

/// z-score of an image; throws ArgumentError for a constant image.
ScalarField standardize(const ScalarField& m);

/// Signed distance of the ground truth, positive inside.
ScalarField make_targets(const BoolMask& truth);

struct Example {
  std::string id;
  std::string category;
  ScalarField image;  ///< standardized
  BoolMask truth;
  ScalarField target;
  LevelSetState state;
  BoolMask last_valid;  ///< mask of the latest non-degenerate state
  std::shared_ptr<const ImageScales> scales;

  /// Mask used for scoring: last_valid once the state has degenerated.
  const BoolMask& mask() const { return last_valid; }
};

/// Standardizes the image, runs the configured initialization and builds
/// the level-set state.
Example make_example(const ScalarField& raw_image, const BoolMask& truth, const TrainConfig& config,
                     std::string id = {}, std::string category = {});

/// Optional extra feature columns appended after the canonical ones.
using FeatureAugment = std::function<void(const Example&, FeatureMatrix&)>;

/// Velocity at the given band voxels of one example.
using VelocitySource =
    std::function<std::vector<double>(const Example&, std::span<const Voxel>)>;

/// Stacked design matrix of one training iteration.
struct Design {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t cols = 0;

  DataView view() const { return {x, cols}; }
};

/// Samples up to samples_per_example band voxels per active example
/// without replacement and stacks their features and targets.
Design build_design(std::span<const Example> examples, const TrainConfig& config, int iteration,
                    const FeatureAugment& augment = {});

/// Least-squares forest for one iteration; TrainingError when no example
/// is active.
Forest fit_iteration(std::span<const Example> examples, const TrainConfig& config, int iteration,
                     const FeatureAugment& augment = {});

/// Velocity from a forest applied to features at the band voxels.
VelocitySource forest_velocity(const Forest& forest, const TrainConfig& config,
                               const FeatureAugment& augment = {});

/// One level-set step per active example (velocity zero off the band).
/// Degenerate states are frozen.
void evolve_all(std::span<Example> examples, const VelocitySource& velocity,
                const TrainConfig& config);
void evolve_all(std::span<Example> examples, const Forest& forest, const TrainConfig& config,
                const FeatureAugment& augment = {});

double mean_jaccard(std::span<const Example> examples);

struct ModelSequence {
  TrainConfig config;
  std::vector<Forest> forests;
  int n_star = 0;
  std::vector<double> val_trace;                 ///< forests.size() + 1 entries
  std::vector<std::vector<double>> importances;  ///< per forest, may be empty
};

struct TrainHooks {
  FeatureAugment augment;
  /// Called after initialization (iteration 0) and after every evolution.
  std::function<void(int, std::span<const Example>, std::span<const Example>)> observer;
  /// Progress messages.
  std::function<void(const std::string&)> log;
};

ModelSequence train(std::vector<Example> train_set, std::vector<Example> val_set,
                    const TrainConfig& config, const TrainHooks& hooks = {});

struct SegmentOptions {
  bool already_standardized = false;
  bool full_domain_velocity = false;  ///< evaluate velocity on every voxel; step still updates the band
  int max_steps = -1;                 ///< default: n_star
  FeatureAugment augment;
};

struct SegmentResult {
  BoolMask mask;
  BoolMask init;
  std::vector<std::size_t> volume_trace;  ///< mask volume after each applied step (index 0: init)
  std::vector<BoolMask> masks;            ///< mask after each applied step (index 0: init)
  LevelSetStatus status = LevelSetStatus::active;
};

/// Applies forests 0..n_star-1 starting from u0; a degenerate state stops
/// the run and the last valid mask is returned with the degenerate status.
SegmentResult segment(const ModelSequence& model, const ScalarField& image,
                      const LevelSetState& u0, const SegmentOptions& options = {});

/// Initializes with the model's init parameters, then segments.
SegmentResult segment(const ModelSequence& model, const ScalarField& image,
                      const SegmentOptions& options = {});

}  // namespace lsml
