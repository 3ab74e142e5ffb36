#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace lsml::cli {

/// Entries of a flat configuration file: "key = value" lines, '#' starts a
/// comment, blank lines are ignored. Keys are long option names with or
/// without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_config(const std::filesystem::path& path);

/// Removes every "--config FILE" / "--config=FILE" from args and inserts the
/// file's entries as "--key=value" right after the subcommand token, so that
/// options given on the command line (which come later) take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args,
                                       const std::set<std::string>& subcommands);

}  // namespace lsml::cli
