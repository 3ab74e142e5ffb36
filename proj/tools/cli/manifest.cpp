#include "cli/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lsml/error.hpp"

namespace fs = std::filesystem;

namespace lsml::cli {

namespace {

const char* const kHeader = "split,id,image_path,mask_path,seed,category,radius";

std::uint64_t parse_u64(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw FormatError("manifest line " + std::to_string(line) + ": bad seed '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw FormatError("manifest line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<ManifestRow> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  const fs::path base = path.parent_path();
  std::string line;
  std::size_t number = 0;
  std::vector<ManifestRow> rows;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1) {
      if (line != kHeader) throw FormatError("manifest header must be '" + std::string(kHeader) + "'");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) {
      throw FormatError("manifest line " + std::to_string(number) + ": expected 7 fields");
    }
    ManifestRow r;
    r.split = f[0];
    r.id = f[1];
    r.image = base / f[2];
    r.mask = base / f[3];
    r.seed = parse_u64(f[4], number);
    r.category = f[5];
    r.radius = parse_real(f[6], number);
    rows.push_back(std::move(r));
  }
  if (number == 0) throw FormatError("manifest " + path.string() + " is empty");
  return rows;
}

void write_manifest(const fs::path& path, const std::vector<ManifestRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const fs::path base = path.parent_path();
  out << kHeader << '\n';
  char radius[32];
  for (const auto& r : rows) {
    std::snprintf(radius, sizeof radius, "%.17g", r.radius);
    out << r.split << ',' << r.id << ',' << r.image.lexically_relative(base).generic_string() << ','
        << r.mask.lexically_relative(base).generic_string() << ',' << r.seed << ',' << r.category
        << ',' << radius << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<ManifestRow> rows_of_split(const std::vector<ManifestRow>& rows,
                                       const std::string& split) {
  std::vector<ManifestRow> out;
  for (const auto& r : rows) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

}  // namespace lsml::cli
