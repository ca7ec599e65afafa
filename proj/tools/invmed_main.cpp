// invmed — inverse medium reconstruction on the unit square.
//
// Every config key doubles as a flag (--KEY VALUE); flag values take
// precedence over the --config file, which takes precedence over defaults.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "invmed/runner.hpp"

namespace {

struct CommandSpec {
  const char* name;
  const char* help;
};

constexpr CommandSpec kCommands[] = {
    {"forward", "synthesize a medium and its boundary Cauchy data"},
    {"probe", "direct sampling probing index from one Cauchy pair"},
    {"saddle", "saddle-point reconstruction (coupled solve or iterative probing)"},
    {"constrained", "nonnegativity-constrained saddle reconstruction"},
    {"sweep", "epsilon sweep against the biharmonic limit"},
    {"heat-reverse", "backward-heat initial-condition recovery"},
    {"sideway", "joint forward march driven by lateral Cauchy data"},
    {"moving", "moving-potential tracking experiment"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invmed — inverse medium reconstruction toolbox"};
  app.require_subcommand(1);

  struct SubState {
    CLI::App* sub = nullptr;
    std::string config_path;
    std::map<std::string, CLI::Option*> options;
    std::map<std::string, std::string> values;
  };
  std::vector<SubState> subs;
  subs.reserve(std::size(kCommands));

  for (const auto& cmd : kCommands) {
    SubState state;
    state.sub = app.add_subcommand(cmd.name, cmd.help);
    state.sub->add_option("--config", state.config_path, "key = value config file");
    subs.push_back(std::move(state));
    SubState& s = subs.back();
    for (const auto& key : invmed::config_keys()) {
      s.options[key] = s.sub->add_option("--" + key, s.values[key]);
    }
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t c = 0; c < subs.size(); ++c) {
    if (!subs[c].sub->parsed()) continue;
    try {
      std::vector<std::pair<std::string, std::string>> overrides;
      for (const auto& [key, opt] : subs[c].options) {
        if (opt->count() > 0) overrides.emplace_back(key, subs[c].values[key]);
      }
      std::optional<std::string> config_path;
      if (!subs[c].config_path.empty()) config_path = subs[c].config_path;

      invmed::RunConfig cfg = invmed::parse_config(config_path, overrides);
      cfg.command = kCommands[c].name;
      const invmed::RunOutcome outcome = invmed::run(cfg);
      if (!outcome.summary.empty()) std::cout << outcome.summary;
      if (outcome.exit_code != invmed::kExitOk) {
        std::cerr << "invmed: run failed (exit category " << outcome.exit_code << ")\n";
      }
      return outcome.exit_code;
    } catch (const invmed::ConfigError& e) {
      std::cerr << "invmed: " << e.what() << "\n";
      return invmed::kExitUsage;
    } catch (const invmed::IoError& e) {
      std::cerr << "invmed: " << e.what() << "\n";
      return invmed::kExitIo;
    } catch (const invmed::Error& e) {
      std::cerr << "invmed: " << e.what() << "\n";
      return invmed::kExitSolver;
    }
  }
  return invmed::kExitUsage;
}
