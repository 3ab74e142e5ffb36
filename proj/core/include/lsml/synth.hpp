#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsml/grid.hpp"

namespace lsml {

enum class PhantomCategory { isolated, juxta_wall, juxta_vessel, low_contrast };

const char* to_string(PhantomCategory c);
PhantomCategory parse_category(const std::string& text);

struct PhantomParams {
  Dims dims{41, 41, 41};
  double radius_min = 6.0;
  double radius_max = 12.0;
  double perturbation = 0.25;  ///< radial bump amplitude as a fraction of the radius, in [0, 0.5]
  double contrast = 1.0;       ///< object intensity over a zero background
  double noise = 0.1;          ///< standard deviation of additive Gaussian noise
  double low_contrast_factor = 0.35;
  double wall_thickness = 6.0;
  double vessel_radius = 2.0;
  PhantomCategory category = PhantomCategory::isolated;
  std::uint64_t seed = 0;
};

struct Phantom {
  ScalarField image;
  BoolMask truth;
  PhantomCategory category = PhantomCategory::isolated;
  double radius = 0.0;  ///< unperturbed radius
  std::uint64_t seed = 0;
};

/// Star-shaped object around the volume center with smooth radial bumps,
/// an optional wall slab or vessel at matched intensity touching the
/// boundary, plus Gaussian noise. Fully determined by params.seed.
Phantom generate(const PhantomParams& params);

struct Dataset {
  std::vector<Phantom> train;
  std::vector<Phantom> val;
  std::vector<Phantom> test;
};

/// Three splits with disjoint seed streams; categories are assigned
/// round-robin per split over `categories`.
Dataset generate_dataset(std::size_t n_train, std::size_t n_val, std::size_t n_test,
                         const PhantomParams& templ, std::uint64_t master_seed,
                         const std::vector<PhantomCategory>& categories = {
                             PhantomCategory::isolated, PhantomCategory::juxta_wall,
                             PhantomCategory::low_contrast});

/// Seed of example `index` in split 0 (train), 1 (val) or 2 (test).
std::uint64_t phantom_seed(std::uint64_t master_seed, int split, std::size_t index);

}  // namespace lsml
