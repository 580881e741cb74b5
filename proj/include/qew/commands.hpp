#ifndef QEW_COMMANDS_HPP
#define QEW_COMMANDS_HPP

// The five experiment commands behind the CLI.  Each reads a JSON config,
// computes everything in memory, and only then writes its output files, so a
// failed run leaves no partial artifacts.  Output bytes are independent of the
// worker count and contain no timestamps.

#include <cstdint>
#include <optional>
#include <string>

namespace qew::commands {

struct CommandOptions {
  std::string config_path;
  std::string out_dir = ".";
  int workers = 1;
  std::optional<std::uint64_t> seed_override;  // replaces the config's seed list
};

// Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 enumeration
// budget exceeded.
int cmd_simulate(const CommandOptions& opt);  // writes records.csv, summary.json
int cmd_bound(const CommandOptions& opt);     // writes bound.csv, bound.json
int cmd_enumerate(const CommandOptions& opt); // writes enumerate.json
int cmd_verify(const CommandOptions& opt);    // writes verify_report.json
int cmd_sweep(const CommandOptions& opt);     // writes sweep.csv, sweep.json

// Dispatch by subcommand name with uniform exception -> exit-code mapping.
int run_command(const std::string& name, const CommandOptions& opt);

}  // namespace qew::commands

#endif
