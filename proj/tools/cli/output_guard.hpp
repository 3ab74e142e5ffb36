#pragma once

#include <filesystem>
#include <vector>

namespace lsml::cli {

/// Remembers every file and directory a command creates so that a failed
/// run can delete its partial outputs. Call commit() once the command has
/// finished; otherwise the destructor removes what was registered.
class OutputGuard {
 public:
  OutputGuard() = default;
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;
  ~OutputGuard();

  /// Registers a file about to be written and creates its parent directory.
  const std::filesystem::path& file(const std::filesystem::path& path);
  /// Creates a directory (and missing parents), registering the new ones.
  void directory(const std::filesystem::path& path);

  void commit() { committed_ = true; }

 private:
  std::vector<std::filesystem::path> files_;
  std::vector<std::filesystem::path> dirs_;  ///< in creation order
  bool committed_ = false;
};

}  // namespace lsml::cli
