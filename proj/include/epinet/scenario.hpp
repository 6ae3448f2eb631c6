#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epinet/control.hpp"
#include "epinet/degree.hpp"
#include "epinet/fluid.hpp"
#include "epinet/policy.hpp"

namespace epinet {

enum class PolicyKind { none, threshold, schedule, sweep, best_response };

const char* policy_kind_name(PolicyKind kind);

struct TauGridSpec {
  double start = 0.0;
  double stop = 0.0;  // 0 means the horizon
  double step = 0.1;
  friend bool operator==(const TauGridSpec&, const TauGridSpec&) = default;
};

struct PolicySpec {
  PolicyKind kind = PolicyKind::none;
  double tau = 0.0;
  std::vector<double> breakpoints;
  std::vector<double> values;
  TauGridSpec tau_grid;
  SweepOptions sweep;
  bool survival_factor = true;
  std::vector<int> degrees;  // best-response degrees; empty means the whole support
  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

struct SimulationSpec {
  int n = 10000;
  int replicas = 50;
  int graphs = 5;  // seeds for the graph-metric averages
  std::uint64_t seed = 1;
  double sample_dt = 0.01;
  int max_attempts = 200;
  bool events = false;
  friend bool operator==(const SimulationSpec&, const SimulationSpec&) = default;
};

struct Scenario {
  std::string label = "scenario";
  DistributionSpec distribution = PoissonSpec{};
  EpidemicParams epidemic;
  XiSpec xi;
  PolicySpec policy;
  CostParams costs;
  std::optional<SimulationSpec> simulation;
  std::string output_dir = "out";
  friend bool operator==(const Scenario&, const Scenario&) = default;

  // Schedule implied by the policy block: none, threshold or explicit schedule.
  // Sweep and best-response scenarios use their `tau` as a threshold.
  Schedule schedule() const;
  VaccinationPolicy vaccination() const { return {xi, schedule()}; }
};

// Strict parse: unknown keys and type errors are ValidationErrors naming the line.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_string(std::string_view text, std::string_view source = "<string>");

// Cross-field checks; parse_scenario already calls this.
void validate_scenario(const Scenario& sc);

// TOML text that parses back to an equal Scenario.
std::string serialize_scenario(const Scenario& sc);

// 64-bit FNV-1a of the serialized scenario, as 16 hex digits.
std::string scenario_hash(const Scenario& sc);

}  // namespace epinet
