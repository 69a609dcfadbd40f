#pragma once

#include <optional>
#include <vector>

#include "cbsmp/roadmap.hpp"

namespace cbsmp {

// Two agents colliding at a shared timestep, with both discretized
// configurations recorded.
struct Conflict {
  int timestep = 0;
  int agent_i = -1;
  int agent_j = -1;
  Configuration config_i;
  Configuration config_j;
};

// The agent's configuration at timestep t: interpolated along the active
// edge, or the goal configuration once the path has finished (agents stay
// physically present).
Configuration config_at_timestep(const TimedPath& path, const Roadmap& r, const RobotModel& robot,
                                 int t, double dt);

// All configurations of one path for t = 0..t_max inclusive.
std::vector<Configuration> discretize_path(const TimedPath& path, const Roadmap& r,
                                           const RobotModel& robot, int t_max, double dt);

// Scans timesteps in increasing order and agent pairs in ascending (i, j)
// order; returns the earliest collision.
std::optional<Conflict> find_first_conflict(const std::vector<TimedPath>& paths,
                                            const std::vector<Roadmap>& roadmaps,
                                            const std::vector<RobotModel>& robots, double dt);

}  // namespace cbsmp
