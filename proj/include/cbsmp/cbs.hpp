#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cbsmp/conflict.hpp"
#include "cbsmp/roadmap.hpp"

namespace cbsmp {

enum class CostMetric { SumOfCosts, Makespan };

const char* metric_name(CostMetric m);
std::optional<CostMetric> metric_from_name(const std::string& name);

double group_cost(const std::vector<TimedPath>& paths, CostMetric metric, double dt);

struct SolveStats {
  long long ct_expanded = 0;
  long long ct_generated = 0;
  long long growth_rounds = 0;
  long long replans = 0;
  long long conflicts_found = 0;
};

struct Solution {
  std::vector<TimedPath> paths;
  double cost = 0;
  SolveStats stats;
};

struct CTNode {
  long long node_id = -1;
  long long parent_id = -1;
  std::vector<Constraint> constraints;
  std::vector<TimedPath> paths;
  double cost = 0;
  std::optional<Conflict> conflict;
};

// Wall-clock budget handle; a default-constructed deadline never expires.
class Deadline {
 public:
  Deadline() = default;
  static Deadline after(double seconds) {
    Deadline d;
    d.unlimited_ = false;
    d.end_ = std::chrono::steady_clock::now() +
             std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                 std::chrono::duration<double>(std::max(0.0, seconds)));
    return d;
  }
  bool expired() const { return !unlimited_ && std::chrono::steady_clock::now() >= end_; }

 private:
  bool unlimited_ = true;
  std::chrono::steady_clock::time_point end_;
};

struct QueryContext {
  const std::vector<Roadmap>& roadmaps;
  const std::vector<RobotModel>& robots;
  std::vector<int> start_vertices;
  std::vector<int> goal_vertices;
  CostMetric metric = CostMetric::SumOfCosts;
  double dt = 0.1;
  int horizon = 256;
  // observes every popped node, in expansion order
  std::function<void(const CTNode&)> on_expand;
};

enum class QueryStatus { Solved, Exhausted, Infeasible, DeadlineHit };

struct QueryResult {
  QueryStatus status = QueryStatus::Infeasible;
  Solution solution;  // populated when status == Solved
  SolveStats stats;
};

// Replan one involved agent under the parent's constraints plus the one new
// constraint derived from `conflict`. Returns nothing when the constraint
// would duplicate an existing one or the replan fails.
std::optional<CTNode> make_child(const QueryContext& ctx, const CTNode& node,
                                 const Conflict& conflict, int constrained_agent,
                                 SolveStats& stats);
// Both children of a conflict, in (agent_i, agent_j) order.
std::vector<CTNode> expand_node(const QueryContext& ctx, const CTNode& node,
                                const Conflict& conflict, SolveStats& stats);

// Best-first conflict-tree search over the given fixed roadmaps.
// max_ct_nodes counts generated nodes, root included; <= 0 means unlimited.
QueryResult cbs_query(const QueryContext& ctx, long long max_ct_nodes,
                      const Deadline& deadline = {});

struct PlannerParams {
  int n0 = 0;                   // 0: 64 for disks/polygons, 128 for chains
  int growth = 0;               // 0: same as the resolved n0
  int k = 8;
  double dt = 0;                // 0: auto so speed * dt <= feature_radius / 2
  long long max_ct_nodes = 64;  // <= 0: unlimited
  CostMetric metric = CostMetric::SumOfCosts;
  int horizon = 0;              // 0: 4x unconstrained makespan, min 256
  double budget_seconds = 1000.0;
  uint64_t seed = 1;
};

int resolved_n0(const RobotModel& robot, const PlannerParams& params);
double auto_dt(const std::vector<RobotModel>& robots);
int auto_horizon(const std::vector<int>& unconstrained_durations);

enum class PlanStatus { Solved, Timeout };

struct PlanResult {
  PlanStatus status = PlanStatus::Timeout;
  Solution solution;  // populated when solved
  std::vector<Roadmap> roadmaps;
  std::vector<int> start_vertices;
  std::vector<int> goal_vertices;
  double dt = 0;
  CostMetric metric = CostMetric::SumOfCosts;
};

// Full planner: build roadmaps, connect endpoints, query; on exhaustion or
// infeasibility grow the roadmaps and start the conflict tree from scratch.
PlanResult plan(const Environment& env, const std::vector<RobotModel>& robots,
                const std::vector<Configuration>& starts, const std::vector<Configuration>& goals,
                const PlannerParams& params);

// Query phase over externally supplied roadmaps (shared-roadmap studies);
// endpoints are connected here, no growth happens.
QueryResult query_on_roadmaps(const Environment& env, const std::vector<Roadmap>& roadmaps,
                              const std::vector<RobotModel>& robots,
                              const std::vector<Configuration>& starts,
                              const std::vector<Configuration>& goals,
                              const PlannerParams& params, std::vector<Roadmap>* used_roadmaps,
                              double* used_dt);

std::string save_solution(const Solution& solution, const std::vector<Roadmap>& roadmaps,
                          const std::vector<RobotModel>& robots, double dt, CostMetric metric);

struct SolutionFile {
  CostMetric metric = CostMetric::SumOfCosts;
  double cost = 0;
  double dt = 0;
  SolveStats stats;
  std::vector<std::string> agent_ids;
  std::vector<std::vector<Configuration>> trajectories;  // per agent, per timestep
};

SolutionFile load_solution(const std::string& text);

}  // namespace cbsmp
