#pragma once

// Shared fixtures and independent oracles for the test suites. Everything in
// here is deliberately written against first principles (orientation tests,
// Bellman-Ford, exhaustive scans) rather than the library's own search and
// collision paths.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cbsmp/cbs.hpp"
#include "cbsmp/conflict.hpp"
#include "cbsmp/rng.hpp"

namespace test_oracle {

using cbsmp::Configuration;
using cbsmp::Environment;
using cbsmp::RobotModel;
using cbsmp::Vec2;

// Independent segment intersection via signed areas.
inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool between(double lo, double hi, double v) {
  return std::min(lo, hi) <= v && v <= std::max(lo, hi);
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  double o1 = orient(a, b, c), o2 = orient(a, b, d);
  double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
      o4 != 0)
    return true;
  auto on = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return orient(p, q, r) == 0 && between(p.x, q.x, r.x) && between(p.y, q.y, r.y);
  };
  return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double len2 = vx * vx + vy * vy;
  double t = len2 == 0 ? 0 : ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Bellman-Ford over integer step weights; the textbook cross-check for the
// unconstrained time-expanded search.
inline std::optional<int> bellman_ford_steps(const cbsmp::Roadmap& r, int source, int target,
                                             double dt) {
  const int n = r.vertex_count();
  const int inf = std::numeric_limits<int>::max() / 2;
  std::vector<int> dist(n, inf);
  dist[source] = 0;
  for (int round = 0; round < n; ++round) {
    bool changed = false;
    for (int v = 0; v < n; ++v) {
      if (dist[v] >= inf) continue;
      for (const cbsmp::Roadmap::Edge& e : r.adjacency[v]) {
        int nd = dist[v] + cbsmp::ceil_steps(e.weight, dt);
        if (nd < dist[e.to]) {
          dist[e.to] = nd;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  if (dist[target] >= inf) return std::nullopt;
  return dist[target];
}

// Exhaustive per-timestep pairwise scan, independent of find_first_conflict.
inline std::optional<int> first_collision_timestep(const std::vector<cbsmp::TimedPath>& paths,
                                                   const std::vector<cbsmp::Roadmap>& roadmaps,
                                                   const std::vector<RobotModel>& robots,
                                                   double dt) {
  int t_max = 0;
  for (const cbsmp::TimedPath& p : paths) t_max = std::max(t_max, p.duration());
  for (int t = 0; t <= t_max; ++t) {
    for (size_t i = 0; i < paths.size(); ++i) {
      for (size_t j = i + 1; j < paths.size(); ++j) {
        Configuration qi = cbsmp::config_at_timestep(paths[i], roadmaps[i], robots[i], t, dt);
        Configuration qj = cbsmp::config_at_timestep(paths[j], roadmaps[j], robots[j], t, dt);
        if (cbsmp::in_collision_pair(robots[i], qi, robots[j], qj)) return t;
      }
    }
  }
  return std::nullopt;
}

}  // namespace test_oracle

namespace fixtures {

inline cbsmp::Environment empty_box(double size) {
  cbsmp::Environment env;
  env.bounds = {{0, 0}, {size, size}};
  return env;
}

inline cbsmp::ConvexPolygon square(double cx, double cy, double half) {
  return {{{cx - half, cy - half}, {cx + half, cy - half}, {cx + half, cy + half},
           {cx - half, cy + half}}};
}

inline cbsmp::RobotModel disk(const std::string& id, double radius, double speed = 1.0) {
  cbsmp::RobotModel r;
  r.id = id;
  r.kind = cbsmp::RobotKind::Disk;
  r.radius = radius;
  r.max_speed = speed;
  return r;
}

inline cbsmp::RobotModel chain(const std::string& id, std::vector<double> lengths, double width,
                               cbsmp::Vec2 base = {0, 0}, double speed = 1.0) {
  cbsmp::RobotModel r;
  r.id = id;
  r.kind = cbsmp::RobotKind::Chain;
  r.link_lengths = std::move(lengths);
  r.link_width = width;
  r.base = base;
  r.max_speed = speed;
  return r;
}

inline cbsmp::Configuration cfg(std::initializer_list<double> vals) {
  return {std::vector<double>(vals)};
}

// Hand-built roadmap for search tests.
inline cbsmp::Roadmap manual_roadmap(const std::string& agent,
                                     std::vector<cbsmp::Configuration> vertices,
                                     std::vector<std::tuple<int, int, double>> edges) {
  cbsmp::Roadmap r;
  r.agent_id = agent;
  r.vertices = std::move(vertices);
  r.adjacency.resize(r.vertices.size());
  for (auto [i, j, w] : edges) r.add_edge(i, j, w);
  return r;
}

// Two disks meeting head-on in a three-vertex corridor. With the bypass both
// routes exist (straight: 6 steps at dt=1, detour: 8); without it the clash
// at the middle vertex is unavoidable.
struct Corridor {
  std::vector<cbsmp::Roadmap> roadmaps;
  std::vector<cbsmp::RobotModel> robots;
  std::vector<int> starts;
  std::vector<int> goals;
  double dt = 1.0;
};

inline Corridor corridor_instance(bool with_bypass) {
  Corridor c;
  std::vector<cbsmp::Configuration> verts{cfg({0, 0}), cfg({3, 0}), cfg({6, 0})};
  std::vector<std::tuple<int, int, double>> edges{{0, 1, 3.0}, {1, 2, 3.0}};
  if (with_bypass) {
    verts.push_back(cfg({3, 2.2}));
    double w = std::hypot(3.0, 2.2);  // 3.72 -> 4 steps
    edges.push_back({0, 3, w});
    edges.push_back({3, 2, w});
  }
  c.roadmaps.push_back(manual_roadmap("a", verts, edges));
  c.roadmaps.push_back(manual_roadmap("b", verts, edges));
  c.robots.push_back(disk("a", 0.5));
  c.robots.push_back(disk("b", 0.5));
  c.starts = {0, 2};
  c.goals = {2, 0};
  return c;
}

}  // namespace fixtures
