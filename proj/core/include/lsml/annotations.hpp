#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lsml/grid.hpp"

namespace lsml {

/// One closed contour drawn on slice k, vertices in continuous (i, j).
struct ContourSlice {
  int k = 0;
  std::vector<std::array<double, 2>> vertices;

  bool operator==(const ContourSlice&) const = default;
};

/// A reader's outline of one object: contours on strictly increasing slices.
struct Annotation {
  std::string reader_id;
  std::vector<ContourSlice> slices;

  bool empty() const { return slices.empty(); }
  bool operator==(const Annotation&) const = default;
};

/// Throws ArgumentError unless slice indices are strictly increasing.
void validate(const Annotation& a);

/// Voxel centers inside each slice polygon (even-odd rule, boundary points
/// inside). Throws ArgumentError for polygons with fewer than 3 vertices or
/// slices outside the grid.
BoolMask rasterize(const Annotation& a, const Dims& dims);

/// Minimum 3D distance between vertices, slice k placed at k * slice_thickness.
double pairwise_distance(const Annotation& a, const Annotation& b, double slice_thickness);

struct AnnotationGroup {
  std::vector<std::size_t> members;  ///< indices into the input list, ascending
  bool over_capacity = false;        ///< could not be split below max_group
};

struct Clustering {
  std::vector<AnnotationGroup> groups;  ///< ordered by first member
  double tau = 0.0;                     ///< adjacency threshold that was used
  bool warning = false;                 ///< some group is over capacity
};

/// Connected components of the graph {d(a, b) <= tau}, shrinking tau by
/// `shrink` from slice_thickness until no group exceeds max_group. Below a
/// floor of 1e-9 the remaining oversized groups are reported as-is.
Clustering cluster(std::span<const Annotation> annotations, double slice_thickness,
                   double shrink = 0.9, std::size_t max_group = 4);

/// Voxels marked by at least half of the masks.
BoolMask consensus50(std::span<const BoolMask> masks);

/// Mean Jaccard overlap of b with every mask.
double mean_jaccard(const BoolMask& b, std::span<const BoolMask> masks);

/// Volume maximizing mean Jaccard with the masks, searched over agreement
/// thresholds followed by single-voxel flip refinement inside the union.
BoolMask jaccard_median(std::span<const BoolMask> masks);

/// Trilinear resampling onto a grid with out_spacing, both grids sharing
/// their physical center; samples outside the input are clamped.
ScalarField resample_isotropic(const ScalarField& f, const Vec3& in_spacing, const Dims& out_dims,
                               double out_spacing = 1.0);

/// Resamples a 0/1 mask and thresholds at 0.5.
BoolMask resample_mask(const BoolMask& m, const Vec3& in_spacing, const Dims& out_dims,
                       double out_spacing = 1.0);

/// Line-oriented corpus: "annotation <reader>", "slice <k>", "v <i> <j>",
/// a blank line ends each annotation. Throws FormatError with a line number.
std::vector<Annotation> read_corpus(std::istream& in);
void write_corpus(std::ostream& out, std::span<const Annotation> annotations);

/// Simulated reader outlines of a mask: per slice, a star polygon traced by
/// in-plane rays from the slice centroid with per-reader radial jitter.
std::vector<Annotation> simulate_readers(const BoolMask& truth, int n_readers, double jitter,
                                         std::uint64_t seed, int n_vertices = 24);

}  // namespace lsml
