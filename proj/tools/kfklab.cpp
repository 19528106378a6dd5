// Command-line laboratory for the kinetic fractional Kolmogorov Dirichlet
// problem: epsilon sweeps of the exit/occupation estimators, spectral kernel
// grids, and the self-validation suite.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kfk/config.hpp"
#include "kfk/run.hpp"

namespace {

void print_usage() {
  std::cout <<
      "usage: kfklab [config-file] [key=value ...]\n"
      "\n"
      "Runs the command named by the resolved configuration (default: validate).\n"
      "Configuration is a line-oriented `key = value` document with optional\n"
      "[sweep], [kernel], [validate] sections; later key=value arguments\n"
      "override file values. Unknown keys are errors.\n"
      "\n"
      "commands (key `command`):\n"
      "  sweep     epsilon sweep of f_eps at 0 and zeta; writes sweep.csv,\n"
      "            verdicts.json, manifest.json\n"
      "  kernel    spectral kernel lattice; writes kernel_grid.csv, manifest.json\n"
      "  validate  full property suite; writes manifest.json\n"
      "\n"
      "examples:\n"
      "  kfklab command=validate\n"
      "  kfklab run.cfg\n"
      "  kfklab run.cfg command=sweep sweep.n_paths=100000 output_dir=out2\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::string config_text;
  std::vector<std::string> overrides;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--help" || arg == "-h") {
      print_usage();
      return 0;
    }
    if (arg.find('=') != std::string::npos) {
      overrides.push_back(arg);
      continue;
    }
    std::ifstream in(arg, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read config file '" << arg << "'\n";
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    config_text += ss.str();
    config_text += "\n";
  }

  try {
    const kfk::RunConfig cfg = kfk::parse_config(config_text, overrides);
    return kfk::run(cfg);
  } catch (const kfk::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
