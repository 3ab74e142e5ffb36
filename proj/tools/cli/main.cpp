#include <algorithm>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "lsml/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Level-set segmentation with learned velocities"};
  app.name("lsml");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (default: LSML_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  std::string config_file;
  app.add_option("--config", config_file,
                 "key = value file of subcommand options; command-line flags win");
  const std::vector<lsml::cli::Command> commands = lsml::cli::add_commands(app);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    const auto& names = lsml::cli::command_names();
    args = lsml::cli::expand_config(std::move(args),
                                    std::set<std::string>(names.begin(), names.end()));
    std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "lsml: error: " << e.what() << '\n';
    return 2;
  }

  if (threads > 0) lsml::set_thread_count(static_cast<std::size_t>(threads));
  for (const auto& command : commands) {
    if (!command.app->parsed()) continue;
    try {
      command.run();
    } catch (const std::exception& e) {
      std::cerr << "lsml " << command.app->get_name() << ": error: " << e.what() << '\n';
      return 1;
    }
  }
  return 0;
}
