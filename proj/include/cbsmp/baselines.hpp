#pragma once

#include "cbsmp/cbs.hpp"

namespace cbsmp {

// All agents concatenated into one sample of the joint space.
struct JointConfiguration {
  std::vector<Configuration> components;

  int total_dof() const {
    int d = 0;
    for (const Configuration& c : components) d += c.dof();
    return d;
  }
};

// Valid iff every component is robot-valid and all pairs are mutually
// collision-free.
bool joint_config_valid(const Environment& env, const std::vector<RobotModel>& robots,
                        const JointConfiguration& q);

// Coupled baseline: PRM over the joint space of the whole team.
PlanResult composite_prm_plan(const Environment& env, const std::vector<RobotModel>& robots,
                              const std::vector<Configuration>& starts,
                              const std::vector<Configuration>& goals,
                              const PlannerParams& params);

// Prioritized decoupled baseline: agents planned in priority order, each
// treating all earlier agents' discretized trajectories (goal persistence
// included) as moving obstacles. Any failure regrows every roadmap and
// restarts the sequence.
PlanResult decoupled_prm_plan(const Environment& env, const std::vector<RobotModel>& robots,
                              const std::vector<Configuration>& starts,
                              const std::vector<Configuration>& goals,
                              const std::vector<int>& priority_order,
                              const PlannerParams& params);

// One pass of the prioritized scheme over fixed roadmaps; no growth.
struct DecoupledQueryResult {
  bool solved = false;
  Solution solution;
};
DecoupledQueryResult decoupled_query_on_roadmaps(const Environment& env,
                                                 const std::vector<Roadmap>& roadmaps,
                                                 const std::vector<RobotModel>& robots,
                                                 const std::vector<Configuration>& starts,
                                                 const std::vector<Configuration>& goals,
                                                 const std::vector<int>& priority_order,
                                                 const PlannerParams& params,
                                                 std::vector<Roadmap>* used_roadmaps,
                                                 double* used_dt, const Deadline& deadline = {});

// Exhaustive uniform-cost search over the time-expanded product of the given
// roadmaps with the exact per-timestep collision semantics of the conflict
// scan. Ground truth for representation-optimal costs.
struct OracleResult {
  enum class Status { Optimal, Infeasible, BoundExceeded };
  Status status = Status::Infeasible;
  double cost = 0;
  std::vector<TimedPath> paths;
  long long states_explored = 0;
};

OracleResult joint_oracle(const std::vector<Roadmap>& roadmaps,
                          const std::vector<RobotModel>& robots,
                          const std::vector<int>& start_vertices,
                          const std::vector<int>& goal_vertices, CostMetric metric, double dt,
                          int horizon, long long state_bound = 10'000'000);

}  // namespace cbsmp
