#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "lsml/grid.hpp"

namespace lsml::cli {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  ///< row-major
};

/// Slice `index` of `field` orthogonal to `axis` (0 = i, 1 = j, 2 = k).
/// Rows run along the first remaining axis and columns along the second.
/// Values are mapped linearly from `window` (default: slice min/max) onto
/// 0..254; voxels on the in-plane contour of `overlay` are drawn at 255.
GrayImage render_slice(const ScalarField& field, int axis, int index,
                       const BoolMask* overlay = nullptr,
                       std::optional<std::pair<double, double>> window = std::nullopt);

/// Binary (P5) PGM.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

}  // namespace lsml::cli
