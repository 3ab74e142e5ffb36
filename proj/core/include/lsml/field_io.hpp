#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>

#include "lsml/grid.hpp"

namespace lsml {

/// LSF1 container: magic "LSF1", ni, nj, nk as little-endian uint32, a dtype
/// byte (0 = float64, 1 = uint8 mask), then the raw little-endian payload in
/// row-major k-fastest order.
enum class FieldDtype : std::uint8_t { float64 = 0, mask_u8 = 1 };

void write_field(std::ostream& out, const ScalarField& f);
void write_field(std::ostream& out, const BoolMask& m);
void write_field(const std::filesystem::path& path, const ScalarField& f);
void write_field(const std::filesystem::path& path, const BoolMask& m);

using AnyField = std::variant<ScalarField, BoolMask>;

/// Reads either dtype. Throws FormatError on a bad magic, unknown dtype or
/// truncated payload.
AnyField read_any_field(std::istream& in);
AnyField read_any_field(const std::filesystem::path& path);

ScalarField read_scalar_field(const std::filesystem::path& path);
BoolMask read_mask(const std::filesystem::path& path);

/// Reads a field of either dtype as scalars (masks become 0/1).
ScalarField read_field_as_scalar(const std::filesystem::path& path);

}  // namespace lsml
