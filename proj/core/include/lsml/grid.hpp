#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lsml/error.hpp"

namespace lsml {

/// Grid extents along the i, j and k axes. Storage is row-major with k
/// fastest; voxel spacing is 1.0 along every axis.
struct Dims {
  int ni = 0;
  int nj = 0;
  int nk = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(ni) * static_cast<std::size_t>(nj) *
           static_cast<std::size_t>(nk);
  }
  int operator[](int axis) const { return axis == 0 ? ni : (axis == 1 ? nj : nk); }
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < ni && j < nj && k < nk;
  }
  bool operator==(const Dims&) const = default;
};

/// Integer voxel coordinate. Ordering is lexicographic in (i, j, k).
struct Voxel {
  int i = 0;
  int j = 0;
  int k = 0;

  auto operator<=>(const Voxel&) const = default;
};

using Vec3 = std::array<double, 3>;

inline Vec3 to_vec(const Voxel& v) {
  return {static_cast<double>(v.i), static_cast<double>(v.j), static_cast<double>(v.k)};
}

/// Dense 3D grid of values.
template <class T>
class Field {
 public:
  using value_type = T;

  Field() = default;

  explicit Field(Dims dims, T fill = T{}) : dims_(dims) {
    if (dims.ni <= 0 || dims.nj <= 0 || dims.nk <= 0) {
      throw DimensionError("field dimensions must be positive");
    }
    data_.assign(dims.size(), fill);
  }

  Field(Dims dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    if (dims.ni <= 0 || dims.nj <= 0 || dims.nk <= 0) {
      throw DimensionError("field dimensions must be positive");
    }
    if (data_.size() != dims.size()) {
      throw DimensionError("field data length does not match dimensions");
    }
  }

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(dims_.nj) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(dims_.nk) +
           static_cast<std::size_t>(k);
  }
  std::size_t index(const Voxel& v) const { return index(v.i, v.j, v.k); }

  Voxel voxel(std::size_t idx) const {
    const auto nk = static_cast<std::size_t>(dims_.nk);
    const auto nj = static_cast<std::size_t>(dims_.nj);
    return {static_cast<int>(idx / (nj * nk)), static_cast<int>((idx / nk) % nj),
            static_cast<int>(idx % nk)};
  }

  T& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  const T& operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  T& operator[](std::size_t idx) { return data_[idx]; }
  const T& operator[](std::size_t idx) const { return data_[idx]; }
  T& at(const Voxel& v) { return data_[index(v)]; }
  const T& at(const Voxel& v) const { return data_[index(v)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool operator==(const Field&) const = default;

 private:
  Dims dims_;
  std::vector<T> data_;
};

using ScalarField = Field<double>;
using BoolMask = Field<std::uint8_t>;
using LabelField = Field<std::int32_t>;

/// Three gradient components sharing one grid.
struct VectorField {
  ScalarField i;
  ScalarField j;
  ScalarField k;

  /// Pointwise Euclidean norm.
  ScalarField norm() const;
};

enum class BoundaryMode {
  one_sided,  ///< forward/backward first differences at the faces
  zero,       ///< gradient component is 0 at the faces
};

/// Central differences in the interior; see BoundaryMode for the faces.
/// Requires at least 3 voxels along every axis.
VectorField central_gradient(const ScalarField& f, BoundaryMode mode);

/// Same stencil as central_gradient evaluated at a single voxel.
Vec3 gradient_at(const ScalarField& f, const Voxel& v, BoundaryMode mode);

/// Separable Gaussian filter, radius ceil(4 sigma), weights renormalized at
/// the borders. sigma == 0 returns a copy.
ScalarField gaussian_smooth(const ScalarField& f, double sigma);

/// Exact Euclidean distance between voxel centers, positive inside the mask
/// (distance to the nearest false voxel) and negative outside (distance to
/// the nearest true voxel). Throws DegenerateMaskError for uniform masks.
ScalarField signed_distance(const BoolMask& m);

/// Squared Euclidean distance from every voxel to the nearest voxel where
/// sites is true; +infinity when there are no sites.
std::vector<double> squared_distance_to(const BoolMask& sites);

struct Component {
  std::int32_t label = 0;
  std::size_t voxel_count = 0;
};

struct Labeling {
  LabelField labels;  ///< 0 for background, components numbered from 1
  std::vector<Component> components;
};

/// 6-connected component labeling; labels are assigned in scan order.
Labeling connected_components(const BoolMask& m);

/// Label of the component with the smallest voxel-to-point distance, ties to
/// the smaller label. Returns 0 when there are no components.
std::int32_t component_nearest(const Labeling& labeling, const Vec3& point);

/// Mask of the voxels carrying the given label.
BoolMask component_mask(const Labeling& labeling, std::int32_t label);

/// Keeps only the component nearest to point; empty input stays empty.
BoolMask keep_nearest_component(const BoolMask& m, const Vec3& point);

/// Trilinear interpolation with coordinates clamped to [0, n-1] per axis.
double trilinear(const ScalarField& f, const Vec3& p);

/// Region where u > 0.
BoolMask positive_region(const ScalarField& u);

/// Mask as a 0/1 scalar field.
ScalarField to_scalar(const BoolMask& m);

std::size_t count_true(const BoolMask& m);

/// Voxel nearest to the geometric center of the grid.
Voxel center_voxel(const Dims& dims);

}  // namespace lsml
