#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lsml::cli {

/// One row of a dataset manifest. Paths are stored relative to the
/// manifest's directory and resolved to full paths when read.
struct ManifestRow {
  std::string split;
  std::string id;
  std::filesystem::path image;
  std::filesystem::path mask;
  std::uint64_t seed = 0;
  std::string category;
  double radius = 0.0;
};

/// split,id,image_path,mask_path,seed,category,radius
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);

std::vector<ManifestRow> rows_of_split(const std::vector<ManifestRow>& rows,
                                       const std::string& split);

/// Comma-separated fields of one CSV line (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace lsml::cli
