#include "cli/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>

#include "lsml/error.hpp"

namespace lsml::cli {

GrayImage render_slice(const ScalarField& field, int axis, int index, const BoolMask* overlay,
                       std::optional<std::pair<double, double>> window) {
  const Dims d = field.dims();
  if (axis < 0 || axis > 2) throw ArgumentError("slice axis must be i, j or k");
  if (index < 0 || index >= d[axis]) throw ArgumentError("slice index out of range");
  if (overlay && overlay->dims() != d) throw DimensionError("overlay and field dimensions differ");

  const int ra = axis == 0 ? 1 : 0;  // row axis
  const int ca = axis == 2 ? 1 : 2;  // column axis
  GrayImage img;
  img.height = d[ra];
  img.width = d[ca];
  auto voxel = [&](int r, int c) {
    int v[3];
    v[axis] = index;
    v[ra] = r;
    v[ca] = c;
    return Voxel{v[0], v[1], v[2]};
  };

  double lo = 0.0, hi = 0.0;
  if (window) {
    std::tie(lo, hi) = *window;
    if (!(hi > lo)) throw ArgumentError("window must satisfy low < high");
  } else {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (int r = 0; r < img.height; ++r) {
      for (int c = 0; c < img.width; ++c) {
        const double x = field.at(voxel(r, c));
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;

  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double t = std::clamp((field.at(voxel(r, c)) - lo) / span, 0.0, 1.0);
      auto px = static_cast<std::uint8_t>(std::lround(254.0 * t));
      if (overlay && overlay->at(voxel(r, c))) {
        const bool edge = r == 0 || c == 0 || r == img.height - 1 || c == img.width - 1 ||
                          !overlay->at(voxel(r - 1, c)) || !overlay->at(voxel(r + 1, c)) ||
                          !overlay->at(voxel(r, c - 1)) || !overlay->at(voxel(r, c + 1));
        if (edge) px = 255;
      }
      img.pixels[static_cast<std::size_t>(r) * img.width + c] = px;
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace lsml::cli
