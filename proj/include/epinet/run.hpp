#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epinet/scenario.hpp"

namespace epinet {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::filesystem::path out_dir;  // empty: the scenario's output.dir
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  bool check_steps = false;
};

struct RunManifest {
  std::string subcommand;
  std::string scenario_label;
  std::string scenario_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> files;  // relative to the output directory
  std::vector<std::pair<std::string, double>> timings;  // seconds
  std::map<std::string, std::string> info;
};

const std::vector<std::string>& subcommands();

// Applies the overrides in `options`, runs the subcommand, writes its CSVs and
// manifest.json into the output directory and returns the manifest.
RunManifest run_subcommand(const std::string& subcommand, Scenario scenario,
                           const RunOptions& options);

// 0 success, 1 validation error, 2 numerical failure.
int exit_code(const std::exception& e);

}  // namespace epinet
