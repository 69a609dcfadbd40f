#include "cbsmp/conflict.hpp"

#include <algorithm>

namespace cbsmp {

Configuration config_at_timestep(const TimedPath& path, const Roadmap& r, const RobotModel& robot,
                                 int t, double dt) {
  (void)dt;
  if (t < 0) throw std::invalid_argument("timestep must be nonnegative");
  if (t >= path.duration()) return r.vertices[path.vertices.back()];
  // Find the active edge: the segment with arrival[k] <= t < arrival[k+1].
  auto it = std::upper_bound(path.arrival.begin(), path.arrival.end(), t);
  size_t k = static_cast<size_t>(it - path.arrival.begin()) - 1;
  int depart = path.arrival[k];
  int arrive = path.arrival[k + 1];
  if (t == depart) return r.vertices[path.vertices[k]];
  double s = static_cast<double>(t - depart) / (arrive - depart);
  return interpolate(robot, r.vertices[path.vertices[k]], r.vertices[path.vertices[k + 1]], s);
}

std::vector<Configuration> discretize_path(const TimedPath& path, const Roadmap& r,
                                           const RobotModel& robot, int t_max, double dt) {
  std::vector<Configuration> out;
  out.reserve(t_max + 1);
  for (int t = 0; t <= t_max; ++t) out.push_back(config_at_timestep(path, r, robot, t, dt));
  return out;
}

std::optional<Conflict> find_first_conflict(const std::vector<TimedPath>& paths,
                                            const std::vector<Roadmap>& roadmaps,
                                            const std::vector<RobotModel>& robots, double dt) {
  const int n = static_cast<int>(paths.size());
  int t_max = 0;
  for (const TimedPath& p : paths) t_max = std::max(t_max, p.duration());
  std::vector<Configuration> configs(n);
  for (int t = 0; t <= t_max; ++t) {
    for (int i = 0; i < n; ++i)
      configs[i] = config_at_timestep(paths[i], roadmaps[i], robots[i], t, dt);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (in_collision_pair(robots[i], configs[i], robots[j], configs[j])) {
          Conflict c;
          c.timestep = t;
          c.agent_i = i;
          c.agent_j = j;
          c.config_i = configs[i];
          c.config_j = configs[j];
          return c;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace cbsmp
