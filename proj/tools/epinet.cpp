#include <cstdlib>
#include <iostream>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "epinet/error.hpp"
#include "epinet/run.hpp"
#include "epinet/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Epidemics with degree-dependent vaccination on configuration-model networks"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  double dt = 0.0;
  bool check_steps = false;

  for (const std::string& name : epinet::subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "Scenario file (TOML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (default: output.dir of the scenario)");
    sub->add_option("--seed", seed, "Base seed, overrides simulation.seed");
    sub->add_option("--threads", threads, "OpenMP threads (fallback: EPINET_THREADS)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--dt", dt, "Integration step, overrides epidemic.dt")->check(CLI::PositiveNumber);
    sub->add_flag("--check-steps", check_steps, "Fail if halving dt moves terminal S by >= 1e-6");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (threads == 0) {
    if (const char* env = std::getenv("EPINET_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        std::cerr << "epinet: EPINET_THREADS must be an integer\n";
        return 1;
      }
    }
  }
  if (threads > 0) omp_set_num_threads(threads);

  CLI::App* chosen = app.get_subcommands().front();
  epinet::RunOptions options;
  options.out_dir = out;
  if (chosen->count("--seed")) options.seed = seed;
  if (chosen->count("--dt")) options.dt = dt;
  options.check_steps = check_steps;

  try {
    const epinet::Scenario scenario = epinet::parse_scenario(config);
    const auto manifest = epinet::run_subcommand(chosen->get_name(), scenario, options);
    for (const auto& [k, v] : manifest.info) std::cout << k << " = " << v << '\n';
    std::cout << "wrote " << manifest.files.size() << " file(s) + manifest.json\n";
  } catch (const std::exception& e) {
    std::cerr << "epinet: " << e.what() << '\n';
    return epinet::exit_code(e);
  }
  return 0;
}
