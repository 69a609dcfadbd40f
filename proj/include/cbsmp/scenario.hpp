#pragma once

#include <string>
#include <vector>

#include "cbsmp/cbs.hpp"

namespace cbsmp {

struct ScenarioParseError : std::runtime_error {
  ScenarioParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  int line_number;
};

struct ScenarioValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name;
  Environment env;
  std::vector<RobotModel> robots;
  std::vector<Configuration> starts;
  std::vector<Configuration> goals;
  PlannerParams params;
  // Starts already in mutual collision: no solution exists under goal
  // persistence; planners will simply exhaust their budget.
  bool unsolvable_start_overlap = false;

  void validate();
};

Scenario load_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);
std::string save_scenario(const Scenario& s);
void save_scenario_file(const Scenario& s, const std::string& path);

// Open square environment scaled so free area per robot stays constant; half
// the agents cross left to right, half bottom to top.
Scenario gen_crossing(int num_agents, double agent_radius, double density_per_robot,
                      uint64_t seed);

// Planar arms based on a circle: starts interleave toward the shared center,
// goals fold outward. Throws when no valid interleaved start is found.
Scenario gen_arms(int num_arms, int links, uint64_t seed);

struct InfeasibleGenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cbsmp
