#pragma once

#include <filesystem>
#include <iosfwd>

#include "lsml/training.hpp"

namespace lsml {

/// LSMODEL1 container: a text header of "key value" lines (reals printed
/// with 17 significant digits) ending with a blank line, then each forest's
/// binary tables, then the per-iteration importance vectors.
/// write -> read -> write reproduces the same bytes.
void write_model(std::ostream& out, const ModelSequence& model);
ModelSequence read_model(std::istream& in);

void write_model(const std::filesystem::path& path, const ModelSequence& model);
ModelSequence read_model(const std::filesystem::path& path);

}  // namespace lsml
