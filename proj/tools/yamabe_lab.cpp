#include <CLI11.hpp>

#include <iostream>

#include "yamabe/config.hpp"
#include "yamabe/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for Yamabe metrics and flow on radial warped products"};
  std::string command, config, out = "out";
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("command", command, "geometry | poisson | flow | stability | decay | riccati | report")
      ->required()
      ->check(CLI::IsMember({"geometry", "poisson", "flow", "stability", "decay", "riccati", "report"}));
  app.add_option("--config", config, "scenario file")->required();
  app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "seed recorded in the manifest");
  app.add_flag("--quiet", quiet, "no diagnostics on stderr");
  CLI11_PARSE(app, argc, argv);

  try {
    auto scenario = yamabe::parse_config(config, yamabe::command_from_string(command));
    scenario.out_dir = out;
    if (seed_opt->count()) scenario.seed = seed;
    yamabe::RunOptions opt;
    opt.threads = yamabe::threads_from_env();
    opt.quiet = quiet;
    return yamabe::run_scenario(scenario, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return yamabe::kExitExecutionError;
  }
}
