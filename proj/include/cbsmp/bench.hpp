#pragma once

#include <string>
#include <vector>

#include "cbsmp/baselines.hpp"
#include "cbsmp/scenario.hpp"

namespace cbsmp {

struct RunRecord {
  std::string scenario;
  std::string planner;
  uint64_t seed = 0;
  std::string outcome;  // solved | timeout | invalid
  double planning_seconds = 0;
  double cost = 0;  // meaningful only when solved
  std::vector<int> roadmap_vertices;
  SolveStats stats;
  std::string flags;  // diagnostics, e.g. unsolvable-start
};

struct BenchOptions {
  int seeds = 1;               // seeds 0..seeds-1 override the scenario seed
  double budget_seconds = -1;  // < 0 keeps each scenario's own budget
  int jobs = 1;
  bool validate = true;  // independent full-scan check of every solution
};

RunRecord run_single(const Scenario& scenario, const std::string& planner, uint64_t seed,
                     double budget_override);

std::vector<RunRecord> run_benchmark(const std::vector<Scenario>& scenarios,
                                     const std::vector<std::string>& planners,
                                     const BenchOptions& options);

extern const char* const kCsvHeader;
std::string records_to_csv(const std::vector<RunRecord>& records);
std::string summarize(const std::vector<RunRecord>& records);

// Full per-timestep pairwise scan, written directly against the collision
// primitives so solution checks do not share the planners' detection path.
bool independent_scan_clean(const std::vector<TimedPath>& paths,
                            const std::vector<Roadmap>& roadmaps,
                            const std::vector<RobotModel>& robots, double dt);

// Head-to-head on identical roadmaps: both planners query the same serialized
// roadmaps each growth round; conflict trees run unlimited.
struct SharedRoundRecord {
  int round = 0;
  std::vector<std::string> cbs_input_hashes;  // per agent, of the roadmap text
  std::vector<std::string> dec_input_hashes;
  bool cbs_solved = false;
  double cbs_cost = 0;
  bool cbs_scan_clean = true;
  bool dec_solved = false;
  double dec_cost = 0;
  bool dec_scan_clean = true;
};

std::vector<SharedRoundRecord> shared_roadmap_rounds(const Scenario& scenario, int rounds,
                                                     uint64_t seed);

std::string fnv1a_hex(const std::string& text);

}  // namespace cbsmp
