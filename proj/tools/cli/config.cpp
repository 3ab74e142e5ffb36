#include "cli/config.hpp"

#include <algorithm>
#include <fstream>

#include "lsml/error.hpp"

namespace lsml::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw FormatError(path.string() + ":" + std::to_string(number) + ": empty key");
    }
    entries.emplace_back(key, value);
  }
  return entries;
}

std::vector<std::string> expand_config(std::vector<std::string> args,
                                       const std::set<std::string>& subcommands) {
  std::vector<std::string> files;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw ArgumentError("--config needs a file name");
      files.push_back(args[++i]);
    } else if (a.rfind("--config=", 0) == 0) {
      files.push_back(a.substr(9));
    } else {
      kept.push_back(a);
    }
  }
  if (files.empty()) return kept;

  const auto sub = std::find_if(kept.begin(), kept.end(),
                                [&](const std::string& a) { return subcommands.count(a) > 0; });
  if (sub == kept.end()) throw ArgumentError("--config requires a subcommand");
  std::vector<std::string> injected;
  for (const auto& file : files) {
    for (const auto& [key, value] : read_config(file)) injected.push_back("--" + key + "=" + value);
  }
  kept.insert(sub + 1, injected.begin(), injected.end());
  return kept;
}

}  // namespace lsml::cli
