#include "lsml/field_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace lsml {

namespace {

static_assert(std::endian::native == std::endian::little,
              "LSF1 I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic = {'L', 'S', 'F', '1'};

void write_header(std::ostream& out, const Dims& d, FieldDtype dtype) {
  out.write(kMagic.data(), kMagic.size());
  for (int axis = 0; axis < 3; ++axis) {
    const auto n = static_cast<std::uint32_t>(d[axis]);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
  }
  const auto code = static_cast<std::uint8_t>(dtype);
  out.write(reinterpret_cast<const char*>(&code), 1);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open for reading: " + path.string());
  return in;
}

}  // namespace

void write_field(std::ostream& out, const ScalarField& f) {
  write_header(out, f.dims(), FieldDtype::float64);
  out.write(reinterpret_cast<const char*>(f.data().data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!out) throw FormatError("LSF1 write failed");
}

void write_field(std::ostream& out, const BoolMask& m) {
  write_header(out, m.dims(), FieldDtype::mask_u8);
  out.write(reinterpret_cast<const char*>(m.data().data()), static_cast<std::streamsize>(m.size()));
  if (!out) throw FormatError("LSF1 write failed");
}

void write_field(const std::filesystem::path& path, const ScalarField& f) {
  auto out = open_out(path);
  write_field(out, f);
}

void write_field(const std::filesystem::path& path, const BoolMask& m) {
  auto out = open_out(path);
  write_field(out, m);
}

AnyField read_any_field(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("not an LSF1 field (bad magic)");
  std::uint32_t n[3];
  in.read(reinterpret_cast<char*>(n), sizeof n);
  std::uint8_t code = 0;
  in.read(reinterpret_cast<char*>(&code), 1);
  if (!in) throw FormatError("truncated LSF1 header");
  if (n[0] == 0 || n[1] == 0 || n[2] == 0 || n[0] > (1u << 20) || n[1] > (1u << 20) ||
      n[2] > (1u << 20)) {
    throw FormatError("LSF1 header has invalid dimensions");
  }
  const Dims dims{static_cast<int>(n[0]), static_cast<int>(n[1]), static_cast<int>(n[2])};
  if (code == static_cast<std::uint8_t>(FieldDtype::float64)) {
    std::vector<double> data(dims.size());
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in) throw FormatError("truncated LSF1 float64 payload");
    return ScalarField(dims, std::move(data));
  }
  if (code == static_cast<std::uint8_t>(FieldDtype::mask_u8)) {
    std::vector<std::uint8_t> data(dims.size());
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!in) throw FormatError("truncated LSF1 mask payload");
    for (auto& b : data) {
      if (b > 1) throw FormatError("LSF1 mask payload contains values other than 0/1");
    }
    return BoolMask(dims, std::move(data));
  }
  throw FormatError("LSF1 dtype code " + std::to_string(code) + " is not supported");
}

AnyField read_any_field(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_any_field(in);
}

ScalarField read_scalar_field(const std::filesystem::path& path) {
  AnyField f = read_any_field(path);
  if (auto* s = std::get_if<ScalarField>(&f)) return std::move(*s);
  throw FormatError(path.string() + ": expected a float64 field, found a mask");
}

BoolMask read_mask(const std::filesystem::path& path) {
  AnyField f = read_any_field(path);
  if (auto* m = std::get_if<BoolMask>(&f)) return std::move(*m);
  throw FormatError(path.string() + ": expected a mask, found a float64 field");
}

ScalarField read_field_as_scalar(const std::filesystem::path& path) {
  AnyField f = read_any_field(path);
  if (auto* m = std::get_if<BoolMask>(&f)) return to_scalar(*m);
  return std::get<ScalarField>(std::move(f));
}

}  // namespace lsml
