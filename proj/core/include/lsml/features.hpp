#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lsml/grid.hpp"

namespace lsml {

enum class FeatureMap { fm1, fm2 };

const char* to_string(FeatureMap map);
/// Accepts "fm1"/"FM1"/"1" and "fm2"/"FM2"/"2".
FeatureMap parse_feature_map(const std::string& text);

/// Default smoothing scales: fine (0) and coarse (3).
inline const std::vector<double>& default_sigmas() {
  static const std::vector<double> sigmas = {0.0, 3.0};
  return sigmas;
}

/// Features that depend only on the segmentation {u > 0}.
struct GlobalShape {
  double length = 0.0;         ///< sum of |D H(u)|, central differences
  double volume = 0.0;         ///< number of positive voxels
  double isoperimetric = 0.0;  ///< 36 pi V^2 / L^3, 0 when L == 0
  Vec3 moment1{};              ///< mean voxel index per axis
  Vec3 moment2{};              ///< mean squared voxel index per axis
  Vec3 com{};                  ///< equals moment1, volume center when V == 0
  double dist_mean = 0.0;      ///< interface-voxel distances to com
  double dist_std = 0.0;
  double dist_max = 0.0;
  bool degenerate = false;     ///< V == 0
};

GlobalShape global_shape(const ScalarField& u);

/// Image statistics for one smoothing scale.
struct GlobalImage {
  double mean_inside = 0.0;
  double std_inside = 0.0;
  double avg_edge = 0.0;          ///< (1/L) sum |D m| |D H(u)|
  double mean_on_boundary = 0.0;  ///< (1/L) sum m |D H(u)|
  bool degenerate = false;        ///< V == 0 or L == 0
};

GlobalImage global_image(const ScalarField& u, const ScalarField& m_sigma);

/// Per-axis slice areas of {u > 0} and their centered absolute changes.
struct SliceAreas {
  std::array<std::vector<double>, 3> area;
  std::array<std::vector<double>, 3> change;
};

SliceAreas slice_areas(const ScalarField& u);

struct LocalShape {
  double dist_com = 0.0;
  Vec3 area{};
  Vec3 area_change{};
};

LocalShape local_shape(const ScalarField& u, const GlobalShape& gs, const SliceAreas& sa,
                       const Voxel& coord);

constexpr int kRaySamples = 10;

struct LocalImage {
  double value = 0.0;
  double edge = 0.0;
  std::array<double, kRaySamples> normal_in{};
  std::array<double, kRaySamples> normal_out{};
  std::array<double, kRaySamples> com_in{};
  std::array<double, kRaySamples> com_out{};
};

LocalImage local_image(const ScalarField& u, const ScalarField& m_sigma, const GlobalShape& gs,
                       const Voxel& coord);

/// Smoothed copies of an image and their edge-strength fields, one per scale.
/// Built once per image and reused across level-set iterations.
class ImageScales {
 public:
  ImageScales(const ScalarField& image, std::vector<double> sigmas);

  const std::vector<double>& sigmas() const { return sigmas_; }
  std::size_t count() const { return sigmas_.size(); }
  const ScalarField& smoothed(std::size_t s) const { return smoothed_[s]; }
  const ScalarField& edge(std::size_t s) const { return edge_[s]; }
  const Dims& dims() const { return smoothed_.front().dims(); }

 private:
  std::vector<double> sigmas_;
  std::vector<ScalarField> smoothed_;
  std::vector<ScalarField> edge_;
};

/// Rows of features for a list of coordinates, columns in canonical order.
struct FeatureMatrix {
  FeatureMap map = FeatureMap::fm1;
  std::vector<double> sigmas;
  std::vector<Voxel> coords;
  std::size_t cols = 0;
  std::vector<double> values;  ///< row-major

  std::size_t rows() const { return coords.size(); }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// 10 + 4 s columns for FM1, 19 + 45 s for FM2 (18 and 109 with two scales).
std::size_t feature_width(FeatureMap map, std::size_t n_sigmas);

/// Stable column identifiers, e.g. "fm2.normal.s0.in.3".
std::vector<std::string> feature_names(FeatureMap map, std::span<const double> sigmas);

FeatureMatrix assemble(const ScalarField& u, const ImageScales& scales, FeatureMap map,
                       std::span<const Voxel> coords);

FeatureMatrix assemble(const ScalarField& u, const ScalarField& image, FeatureMap map,
                       std::span<const Voxel> coords,
                       std::span<const double> sigmas = default_sigmas());

/// Header of canonical names plus coordinate columns, then one row per voxel.
void write_csv(std::ostream& out, const FeatureMatrix& fm);

}  // namespace lsml
