#pragma once

#include <functional>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace lsml::cli {

struct Command {
  CLI::App* app = nullptr;
  std::function<void()> run;  ///< executes the command with its parsed options
};

/// Subcommand names, in registration order.
const std::vector<std::string>& command_names();

/// Adds every subcommand with its options to `app`.
std::vector<Command> add_commands(CLI::App& app);

}  // namespace lsml::cli
