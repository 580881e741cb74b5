// qew: lattice depinning lab driver.
//   qew <simulate|bound|enumerate|verify|sweep> --config <file> [--out <dir>]
//       [--workers <n>] [--seed-override <seed>]

#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "qew/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"quenched Edwards-Wilkinson lattice lab"};
  app.require_subcommand(1);

  qew::commands::CommandOptions opt;
  std::uint64_t seed_override = 0;

  const auto add_command = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON experiment configuration")->required();
    sub->add_option("--out", opt.out_dir, "existing output directory (default: .)");
    sub->add_option("--workers", opt.workers, "worker threads for the integrator")
        ->check(CLI::Range(1, 256));
    sub->add_option("--seed-override", seed_override, "replace the config's seed list");
  };

  add_command("simulate", "integrate the interface ODE and record velocities");
  add_command("bound", "evaluate the ballistic velocity lower bound over an F grid");
  add_command("enumerate", "exhaustively enumerate admissible profiles");
  add_command("verify", "run the exact-identity and inequality check suite");
  add_command("sweep", "measured velocity vs lower bound over an F grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;  // --help exits 0; any parse error is a usage error
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed-override") > 0) opt.seed_override = seed_override;
  return qew::commands::run_command(sub->get_name(), opt);
}
