// rotordyn command-line front end.
//
//   rotordyn <scenario> [--config <path>] [--out <prefix>] [--seed N]
//            [--set key=value ...]
//
// Scenarios: classical, spectrum, evolve-unitary, evolve-master,
// evolve-trajectory, wigner-snapshots. The scenario may instead be given by
// a `scenario = ...` line in the config file. ROTORDYN_OUT_DIR sets the
// default output directory.
//
// Exit codes: 0 ok, 2 config/parse error, 3 convergence/truncation error,
// 4 numerical error, 5 I/O error.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rotordyn/rotordyn.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rotordyn::io_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotordyn - rotational dynamics of a diatomic molecule in a laser field"};
  app.get_formatter()->column_width(28);

  std::string scenario_arg;
  std::string config_path;
  std::string out_prefix;
  std::string seed_arg;
  std::vector<std::string> overrides;

  app.add_option("scenario", scenario_arg,
                 "classical | spectrum | evolve-unitary | evolve-master | "
                 "evolve-trajectory | wigner-snapshots");
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_prefix, "output path prefix (default: scenario name)");
  app.add_option("--seed", seed_arg, "override the RNG seed");
  app.add_option("--set", overrides, "override single config keys (key=value)")
      ->take_all();

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<rotordyn::Scenario> cli_scenario;
    if (!scenario_arg.empty()) {
      cli_scenario = rotordyn::scenario_from_name(scenario_arg);
      if (!cli_scenario)
        throw rotordyn::parse_error("unknown scenario '" + scenario_arg + "'");
    }

    const std::string text = config_path.empty() ? std::string() : read_file(config_path);
    rotordyn::ScenarioConfig cfg = rotordyn::parse_config(text, cli_scenario, overrides);
    if (!seed_arg.empty()) {
      try {
        cfg.seed = std::stoull(seed_arg);
      } catch (const std::exception&) {
        throw rotordyn::parse_error("--seed: malformed integer '" + seed_arg + "'");
      }
    }

    const std::string prefix = rotordyn::resolve_output_prefix(
        out_prefix.empty() ? rotordyn::scenario_name(cfg.scenario) : out_prefix);
    const rotordyn::RunResult result = rotordyn::run_scenario(cfg, prefix);
    for (const auto& f : result.files) std::cout << f << "\n";
    return 0;
  } catch (const rotordyn::parse_error& e) {
    std::cerr << "rotordyn: " << e.what() << "\n";
    return 2;
  } catch (const rotordyn::convergence_error& e) {
    std::cerr << "rotordyn: " << e.what() << "\n";
    return 3;
  } catch (const rotordyn::io_error& e) {
    std::cerr << "rotordyn: " << e.what() << "\n";
    return 5;
  } catch (const rotordyn::numerical_error& e) {
    std::cerr << "rotordyn: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "rotordyn: " << e.what() << "\n";
    return 4;
  }
}
