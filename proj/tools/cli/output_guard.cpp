#include "cli/output_guard.hpp"

#include <system_error>

namespace fs = std::filesystem;

namespace lsml::cli {

OutputGuard::~OutputGuard() {
  if (committed_) return;
  std::error_code ec;
  for (auto it = files_.rbegin(); it != files_.rend(); ++it) {
    if (!fs::is_directory(*it, ec)) fs::remove(*it, ec);
  }
  // Only directories this run created, deepest first, and only when empty.
  for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it) fs::remove(*it, ec);
}

const fs::path& OutputGuard::file(const fs::path& path) {
  if (path.has_parent_path()) directory(path.parent_path());
  files_.push_back(path);
  return files_.back();
}

void OutputGuard::directory(const fs::path& path) {
  if (path.empty()) return;
  std::vector<fs::path> missing;
  for (fs::path p = fs::absolute(path); !p.empty() && !fs::exists(p); p = p.parent_path()) {
    missing.push_back(p);
    if (p == p.parent_path()) break;
  }
  fs::create_directories(path);
  dirs_.insert(dirs_.end(), missing.rbegin(), missing.rend());
}

}  // namespace lsml::cli
