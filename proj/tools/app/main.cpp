#include "commands.hpp"

#include "qstrat/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Quantitative stratification of approximate harmonic maps"};
  app.require_subcommand(1);
  std::string config_file;
  std::vector<std::string> overrides;
  bool quiet = false;
  app.add_option("-c,--config", config_file, "flat key = value configuration file");
  app.add_option("-s,--set", overrides, "override key=value (repeatable, wins over the file)");
  app.add_flag("-q,--quiet", quiet, "suppress progress output");
  app.fallthrough();
  std::string command;
  for (const char* name : {"analyze", "verify", "beta", "reifenberg", "cover"}) {
    auto* sub = app.add_subcommand(name);
    sub->callback([&command, name] { command = name; });
  }
  app.add_subcommand("keys", "list configuration keys")->callback([&command] { command = "keys"; });
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (command == "keys") {
    for (const auto& k : qstrat::app::RunConfig::keys())
      std::cout << k.key << " = " << k.value << "    # " << k.help << '\n';
    return 0;
  }
  qstrat::app::RunConfig cfg;
  try {
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& o : overrides) cfg.set_assignment(o);
  } catch (const qstrat::Error& e) {
    std::cerr << "qstrat " << command << ": " << e.what() << '\n';
    return 2;
  }
  std::ostream null(nullptr);
  return qstrat::app::dispatch(command, cfg, quiet ? null : std::cout, std::cerr);
}
