#include "commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  using namespace oslab::cli;
  CLI::App app{"oslab: one-scale H-distribution experiments", "oslab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);

  RunOptions opt;
  const std::vector<std::pair<const char*, const char*>> subcommands{
      {"geometry", "compactification property suite"},
      {"symbol", "boundary traces and Mihlin report"},
      {"pair", "pairing traces against closed forms"},
      {"wigner", "Wigner pairing identity and quantisation gaps"},
      {"localize", "localisation principle checks"},
      {"report", "human-readable summary of a run (--config points at summary.json or its directory)"},
  };
  for (const auto& [name, help] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "experiment configuration (JSON)")->required();
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--tolerance-scale", opt.tolerance_scale, "multiplies every default tolerance")
        ->check(CLI::PositiveNumber);
    sub->callback([&opt, name = std::string(name)] { opt.subcommand = name; });
  }

  if (argc > 1 && argv[1][0] != '-') {
    const std::string first = argv[1];
    bool known = false;
    for (const auto& entry : subcommands) known = known || first == entry.first;
    if (!known) {
      std::cerr << "unknown subcommand '" << first << "'\n" << app.help();
      return kExitUsage;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (opt.subcommand == "report" && app.get_subcommand("report")->count("--out") == 0) opt.out.clear();

  try {
    return run(opt, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const oslab::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const oslab::UsageError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
