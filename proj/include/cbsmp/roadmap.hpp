#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cbsmp/geometry.hpp"

namespace cbsmp {

struct SamplingExhaustedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-agent PRM. Edges are undirected and stored in both adjacency lists,
// sorted by neighbor index; weights are traversal seconds.
struct Roadmap {
  struct Edge {
    int to = -1;
    double weight = 0;
  };

  std::string agent_id;
  std::vector<Configuration> vertices;
  std::vector<std::vector<Edge>> adjacency;
  std::vector<std::pair<uint64_t, int>> seed_lineage;  // (seed, samples added)

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int edge_count() const;
  bool has_edge(int i, int j) const;
  double edge_weight(int i, int j) const;  // nan when absent
  void add_edge(int i, int j, double weight);
};

// A roadmap path synchronized onto the global dt grid. arrival[k] is the
// timestep at which vertices[k] is reached; arrival[0] == 0.
struct TimedPath {
  int agent = -1;
  std::vector<int> vertices;
  std::vector<int> arrival;
  double cost = 0;  // duration() * dt

  int duration() const { return arrival.empty() ? 0 : arrival.back(); }
  bool spatially_simple() const;
};

// Avoid colliding with `other_robot` standing at `other_config` when this
// agent occupies `timestep`.
struct Constraint {
  int agent = -1;
  int timestep = 0;
  RobotModel other_robot;
  Configuration other_config;

  bool same_as(const Constraint& o) const {
    return agent == o.agent && timestep == o.timestep && other_robot.id == o.other_robot.id &&
           other_config == o.other_config;
  }
};

int ceil_steps(double weight, double dt);

Roadmap build_roadmap(const Environment& env, const RobotModel& robot, int n, int k,
                      uint64_t seed);
Roadmap grow_roadmap(const Roadmap& r, const Environment& env, const RobotModel& robot,
                     int n_additional, int k, uint64_t seed);

struct EndpointConnection {
  Roadmap roadmap;
  int start_vertex = -1;
  int goal_vertex = -1;
  bool start_connected = false;
  bool goal_connected = false;

  bool ok() const { return start_connected && goal_connected; }
};

EndpointConnection connect_endpoints(const Roadmap& r, const Environment& env,
                                     const RobotModel& robot, const Configuration& start,
                                     const Configuration& goal, int k);

// Plain Dijkstra duration (in timesteps) ignoring constraints; used for
// horizon sizing and connectivity checks.
std::optional<int> unconstrained_duration(const Roadmap& r, int start_vertex, int goal_vertex,
                                          double dt);

// Uniform-cost search over (vertex, timestep) states. An edge departing at t
// with d steps occupies timesteps [t+1, t+d]; it is pruned iff a constraint
// timestep falls in that range and the interpolated configuration collides
// with the constraint's robot/configuration. Ties between equal-duration
// paths resolve to the lexicographically smallest vertex sequence.
std::optional<TimedPath> constrained_shortest_path(const Roadmap& r, const RobotModel& robot,
                                                   int start_vertex, int goal_vertex,
                                                   const std::vector<Constraint>& constraints,
                                                   double dt, int horizon);

std::string save_roadmap(const Roadmap& r);
Roadmap load_roadmap(const std::string& text);
void save_roadmap_file(const Roadmap& r, const std::string& path);
Roadmap load_roadmap_file(const std::string& path);

}  // namespace cbsmp
