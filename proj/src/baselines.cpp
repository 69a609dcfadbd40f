#include "cbsmp/baselines.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <map>
#include <queue>
#include <unordered_map>

#include "cbsmp/rng.hpp"

namespace cbsmp {

bool joint_config_valid(const Environment& env, const std::vector<RobotModel>& robots,
                        const JointConfiguration& q) {
  const size_t n = robots.size();
  for (size_t i = 0; i < n; ++i)
    if (!is_valid_config(env, robots[i], q.components[i])) return false;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (in_collision_pair(robots[i], q.components[i], robots[j], q.components[j])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// CompositePRM
// ---------------------------------------------------------------------------

namespace {

struct JointRoadmap {
  struct Edge {
    int to;
    double weight;  // synchronized traversal seconds: max over agents
  };
  std::vector<JointConfiguration> vertices;
  std::vector<std::vector<Edge>> adjacency;

  void add_edge(int i, int j, double w) {
    auto ins = [](std::vector<Edge>& nbrs, Edge e) {
      auto it = std::lower_bound(nbrs.begin(), nbrs.end(), e.to,
                                 [](const Edge& a, int to) { return a.to < to; });
      nbrs.insert(it, e);
    };
    ins(adjacency[i], {j, w});
    ins(adjacency[j], {i, w});
  }
  bool has_edge(int i, int j) const {
    for (const Edge& e : adjacency[i])
      if (e.to == j) return true;
    return false;
  }
};

double joint_distance(const std::vector<RobotModel>& robots, const JointConfiguration& a,
                      const JointConfiguration& b) {
  double d = 0;
  for (size_t i = 0; i < robots.size(); ++i)
    d += cspace_distance(robots[i], a.components[i], b.components[i]);
  return d;
}

double joint_traversal_seconds(const std::vector<RobotModel>& robots, const JointConfiguration& a,
                               const JointConfiguration& b) {
  double t = 0;
  for (size_t i = 0; i < robots.size(); ++i)
    t = std::max(t, cspace_distance(robots[i], a.components[i], b.components[i]) /
                        robots[i].max_speed);
  return t;
}

// Synchronized sweep: env validity on the structural grid (the same grid
// single-agent edge validation uses), pairwise checks on both the structural
// grid and the dt grid the conflict scan will later sample.
bool joint_edge_valid(const Environment& env, const std::vector<RobotModel>& robots,
                      const JointConfiguration& a, const JointConfiguration& b, double dt) {
  const size_t n = robots.size();
  int resolution = 1;
  for (size_t i = 0; i < n; ++i) {
    double dist = cspace_distance(robots[i], a.components[i], b.components[i]);
    resolution = std::max(
        resolution, static_cast<int>(std::ceil(dist / default_edge_step(robots[i]))));
  }
  std::vector<Configuration> configs(n);
  auto at = [&](double s) {
    for (size_t i = 0; i < n; ++i)
      configs[i] = interpolate(robots[i], a.components[i], b.components[i], s);
  };
  auto pairwise_free = [&]() {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j)
        if (in_collision_pair(robots[i], configs[i], robots[j], configs[j])) return false;
    return true;
  };
  for (int s = 0; s <= resolution; ++s) {
    at(static_cast<double>(s) / resolution);
    for (size_t i = 0; i < n; ++i)
      if (!is_valid_config(env, robots[i], configs[i])) return false;
    if (!pairwise_free()) return false;
  }
  int steps = ceil_steps(joint_traversal_seconds(robots, a, b), dt);
  for (int s = 0; s <= steps; ++s) {
    at(static_cast<double>(s) / steps);
    if (!pairwise_free()) return false;
  }
  return true;
}

void joint_connect_k_nearest(JointRoadmap& r, const Environment& env,
                             const std::vector<RobotModel>& robots, int i, int k, double dt,
                             const Deadline& deadline) {
  std::vector<std::pair<double, int>> candidates;
  for (int j = 0; j < static_cast<int>(r.vertices.size()); ++j) {
    if (j == i) continue;
    candidates.emplace_back(joint_distance(robots, r.vertices[i], r.vertices[j]), j);
  }
  std::sort(candidates.begin(), candidates.end());
  int attempts = std::min<int>(k, static_cast<int>(candidates.size()));
  for (int c = 0; c < attempts && !deadline.expired(); ++c) {
    auto [dist, j] = candidates[c];
    if (dist <= 0 || r.has_edge(i, j)) continue;
    if (joint_edge_valid(env, robots, r.vertices[i], r.vertices[j], dt))
      r.add_edge(i, j, joint_traversal_seconds(robots, r.vertices[i], r.vertices[j]));
  }
}

// Samples up to n valid joint configurations; per-agent streams so that the
// single-agent case reduces to the decoupled sampler.
int joint_sample_into(JointRoadmap& r, const Environment& env,
                      const std::vector<RobotModel>& robots, int n, uint64_t seed, int round,
                      const Deadline& deadline) {
  const size_t agents = robots.size();
  std::vector<Rng> streams;
  for (size_t a = 0; a < agents; ++a) streams.emplace_back(mix64(seed, a, round));
  long long max_attempts = 100LL * n;
  int added = 0;
  for (long long attempt = 0; attempt < max_attempts && added < n && !deadline.expired();
       ++attempt) {
    JointConfiguration q;
    q.components.resize(agents);
    for (size_t a = 0; a < agents; ++a) {
      Configuration& c = q.components[a];
      c.values.resize(robots[a].dof());
      if (robots[a].kind == RobotKind::Chain) {
        for (double& v : c.values) v = streams[a].uniform(-kPi, kPi);
      } else {
        c.values[0] = streams[a].uniform(env.bounds.min.x, env.bounds.max.x);
        c.values[1] = streams[a].uniform(env.bounds.min.y, env.bounds.max.y);
      }
    }
    if (joint_config_valid(env, robots, q)) {
      r.vertices.push_back(std::move(q));
      r.adjacency.emplace_back();
      ++added;
    }
  }
  return added;
}

int joint_insert_or_find(JointRoadmap& r, const std::vector<RobotModel>& robots,
                         const JointConfiguration& q) {
  for (int j = 0; j < static_cast<int>(r.vertices.size()); ++j)
    if (joint_distance(robots, q, r.vertices[j]) <= 1e-9) return j;
  r.vertices.push_back(q);
  r.adjacency.emplace_back();
  return static_cast<int>(r.vertices.size()) - 1;
}

std::optional<std::vector<int>> joint_dijkstra(const JointRoadmap& r, int start, int goal) {
  const int n = static_cast<int>(r.vertices.size());
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[start] = 0;
  open.emplace(0.0, start);
  while (!open.empty()) {
    auto [d, v] = open.top();
    open.pop();
    if (d > dist[v]) continue;
    if (v == goal) break;
    for (const JointRoadmap::Edge& e : r.adjacency[v]) {
      double nd = d + e.weight;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        parent[e.to] = v;
        open.emplace(nd, e.to);
      }
    }
  }
  if (dist[goal] == std::numeric_limits<double>::infinity()) return std::nullopt;
  std::vector<int> path;
  for (int v = goal; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

// Split a joint path into synchronized per-agent timed paths. Each agent's
// path roadmap carries edge weights equal to the synchronized joint time, so
// its interpolated motion matches the validated joint sweep.
void decompose_joint_path(const JointRoadmap& jr, const std::vector<int>& joint_path,
                          const std::vector<RobotModel>& robots, double dt,
                          std::vector<TimedPath>& paths, std::vector<Roadmap>& roadmaps) {
  const size_t n = robots.size();
  paths.assign(n, {});
  roadmaps.assign(n, {});
  for (size_t a = 0; a < n; ++a) {
    Roadmap& r = roadmaps[a];
    TimedPath& p = paths[a];
    r.agent_id = robots[a].id;
    p.agent = static_cast<int>(a);
    r.vertices.push_back(jr.vertices[joint_path[0]].components[a]);
    r.adjacency.emplace_back();
    p.vertices.push_back(0);
    p.arrival.push_back(0);
  }
  int t = 0;
  for (size_t e = 0; e + 1 < joint_path.size(); ++e) {
    const JointConfiguration& from = jr.vertices[joint_path[e]];
    const JointConfiguration& to = jr.vertices[joint_path[e + 1]];
    t += ceil_steps(joint_traversal_seconds(robots, from, to), dt);
    for (size_t a = 0; a < n; ++a) {
      if (cspace_distance(robots[a], to.components[a],
                          roadmaps[a].vertices[paths[a].vertices.back()]) == 0)
        continue;  // component held still over this joint edge
      Roadmap& r = roadmaps[a];
      TimedPath& p = paths[a];
      int prev = p.vertices.back();
      int prev_t = p.arrival.back();
      r.vertices.push_back(to.components[a]);
      r.adjacency.emplace_back();
      int v = r.vertex_count() - 1;
      r.add_edge(prev, v, static_cast<double>(t - prev_t) * dt);
      p.vertices.push_back(v);
      p.arrival.push_back(t);
    }
  }
  for (size_t a = 0; a < n; ++a) paths[a].cost = paths[a].duration() * dt;
}

}  // namespace

PlanResult composite_prm_plan(const Environment& env, const std::vector<RobotModel>& robots,
                              const std::vector<Configuration>& starts,
                              const std::vector<Configuration>& goals,
                              const PlannerParams& params) {
  const size_t n = robots.size();
  if (n == 0 || starts.size() != n || goals.size() != n)
    throw std::invalid_argument("composite_prm_plan: mismatched agent counts");

  Deadline deadline = Deadline::after(params.budget_seconds);
  double dt = params.dt > 0 ? params.dt : auto_dt(robots);

  PlanResult result;
  result.dt = dt;
  result.metric = params.metric;

  int n_round = 0;
  for (const RobotModel& r : robots) n_round = std::max(n_round, resolved_n0(r, params));

  JointRoadmap jr;
  JointConfiguration jstart{starts}, jgoal{goals};
  long long round = 0;
  SolveStats totals;

  while (!deadline.expired()) {
    int added = joint_sample_into(jr, env, robots, n_round, params.seed, static_cast<int>(round),
                                  deadline);
    int first_new = static_cast<int>(jr.vertices.size()) - added;
    for (int i = first_new; i < static_cast<int>(jr.vertices.size()) && !deadline.expired(); ++i)
      joint_connect_k_nearest(jr, env, robots, i, params.k, dt, deadline);

    int sv = joint_insert_or_find(jr, robots, jstart);
    joint_connect_k_nearest(jr, env, robots, sv, params.k, dt, deadline);
    int gv = joint_insert_or_find(jr, robots, jgoal);
    joint_connect_k_nearest(jr, env, robots, gv, params.k, dt, deadline);

    ++totals.replans;
    std::optional<std::vector<int>> jpath;
    if (sv == gv)
      jpath = std::vector<int>{sv};
    else
      jpath = joint_dijkstra(jr, sv, gv);
    if (jpath) {
      std::vector<TimedPath> paths;
      std::vector<Roadmap> roadmaps;
      decompose_joint_path(jr, *jpath, robots, dt, paths, roadmaps);
      // The joint sweep already checked the dt grid; this scan is the final
      // arbiter and rejects any residual disagreement.
      if (!find_first_conflict(paths, roadmaps, robots, dt)) {
        result.status = PlanStatus::Solved;
        result.solution.paths = std::move(paths);
        result.solution.cost = group_cost(result.solution.paths, params.metric, dt);
        result.solution.stats = totals;
        result.solution.stats.growth_rounds = round;
        result.roadmaps = std::move(roadmaps);
        for (const TimedPath& p : result.solution.paths) {
          result.start_vertices.push_back(p.vertices.front());
          result.goal_vertices.push_back(p.vertices.back());
        }
        return result;
      }
      ++totals.conflicts_found;
    }
    ++round;
  }
  result.status = PlanStatus::Timeout;
  result.solution.stats = totals;
  result.solution.stats.growth_rounds = round;
  return result;
}

// ---------------------------------------------------------------------------
// DecoupledPRM
// ---------------------------------------------------------------------------

namespace {

// Fixed trajectories of higher-priority agents, tabulated per timestep.
struct MovingObstacles {
  std::vector<const RobotModel*> robots;
  std::vector<std::vector<Configuration>> tables;
  int latest = 0;  // max table length - 1; everyone is parked afterwards

  const Configuration& at(size_t a, int t) const {
    const auto& tab = tables[a];
    return t < static_cast<int>(tab.size()) ? tab[t] : tab.back();
  }
  bool collides(const RobotModel& robot, const Configuration& q, int t) const {
    for (size_t a = 0; a < robots.size(); ++a)
      if (in_collision_pair(robot, q, *robots[a], at(a, t))) return true;
    return false;
  }
};

// Time-expanded search against moving obstacles. Goal arrivals are accepted
// only if parking there stays collision-free for the rest of the group plan;
// the goal vertex is terminal, matching the conflict-tree low level.
std::optional<TimedPath> dynamic_obstacle_path(const Roadmap& r, const RobotModel& robot,
                                               int start_vertex, int goal_vertex,
                                               const MovingObstacles& obstacles, double dt,
                                               int horizon) {
  const int n = r.vertex_count();
  auto idx = [n](int t, int v) { return static_cast<size_t>(t) * n + v; };

  auto park_ok = [&](int t) {
    int t_end = std::max(t, obstacles.latest);
    for (int tau = t; tau <= t_end; ++tau)
      if (obstacles.collides(robot, r.vertices[goal_vertex], tau)) return false;
    return true;
  };

  TimedPath path;
  path.vertices = {start_vertex};
  path.arrival = {0};
  if (start_vertex == goal_vertex) {
    if (!park_ok(0)) return std::nullopt;
    return path;
  }

  auto edge_free = [&](int from, int to, int depart, int steps) {
    for (int tau = depart + 1; tau <= depart + steps; ++tau) {
      double s = static_cast<double>(tau - depart) / steps;
      Configuration q = interpolate(robot, r.vertices[from], r.vertices[to], s);
      if (obstacles.collides(robot, q, tau)) return false;
    }
    return true;
  };

  std::vector<uint8_t> reach(static_cast<size_t>(horizon + 1) * n, 0);
  reach[idx(0, start_vertex)] = 1;
  int goal_time = -1;
  for (int t = 0; t <= horizon && goal_time < 0; ++t) {
    if (reach[idx(t, goal_vertex)] && park_ok(t)) {
      goal_time = t;
      break;
    }
    for (int v = 0; v < n; ++v) {
      if (v == goal_vertex || !reach[idx(t, v)]) continue;
      for (const Roadmap::Edge& e : r.adjacency[v]) {
        int steps = ceil_steps(e.weight, dt);
        int t2 = t + steps;
        if (t2 > horizon || reach[idx(t2, e.to)]) continue;
        if (edge_free(v, e.to, t, steps)) reach[idx(t2, e.to)] = 1;
      }
    }
  }
  if (goal_time < 0) return std::nullopt;

  std::vector<uint8_t> leads(static_cast<size_t>(goal_time + 1) * n, 0);
  leads[idx(goal_time, goal_vertex)] = 1;
  for (int t = goal_time - 1; t >= 0; --t) {
    for (int v = 0; v < n; ++v) {
      if (v == goal_vertex || !reach[idx(t, v)]) continue;
      for (const Roadmap::Edge& e : r.adjacency[v]) {
        int steps = ceil_steps(e.weight, dt);
        int t2 = t + steps;
        if (t2 > goal_time || !leads[idx(t2, e.to)]) continue;
        if (e.to == goal_vertex && t2 != goal_time) continue;
        if (edge_free(v, e.to, t, steps)) {
          leads[idx(t, v)] = 1;
          break;
        }
      }
    }
  }

  int v = start_vertex;
  int t = 0;
  while (v != goal_vertex) {
    bool advanced = false;
    for (const Roadmap::Edge& e : r.adjacency[v]) {
      int steps = ceil_steps(e.weight, dt);
      int t2 = t + steps;
      if (t2 > goal_time || !leads[idx(t2, e.to)]) continue;
      if (e.to == goal_vertex && t2 != goal_time) continue;
      if (!edge_free(v, e.to, t, steps)) continue;
      path.vertices.push_back(e.to);
      path.arrival.push_back(t2);
      v = e.to;
      t = t2;
      advanced = true;
      break;
    }
    if (!advanced) return std::nullopt;
  }
  path.cost = path.duration() * dt;
  return path;
}

}  // namespace

DecoupledQueryResult decoupled_query_on_roadmaps(const Environment& env,
                                                 const std::vector<Roadmap>& roadmaps,
                                                 const std::vector<RobotModel>& robots,
                                                 const std::vector<Configuration>& starts,
                                                 const std::vector<Configuration>& goals,
                                                 const std::vector<int>& priority_order,
                                                 const PlannerParams& params,
                                                 std::vector<Roadmap>* used_roadmaps,
                                                 double* used_dt, const Deadline& deadline) {
  const size_t n = robots.size();
  double dt = params.dt > 0 ? params.dt : auto_dt(robots);
  if (used_dt) *used_dt = dt;

  DecoupledQueryResult out;
  std::vector<Roadmap> connected;
  std::vector<int> svs(n), gvs(n);
  std::vector<int> durations;
  bool ok = true;
  for (size_t i = 0; i < n; ++i) {
    EndpointConnection conn = connect_endpoints(roadmaps[i], env, robots[i], starts[i], goals[i],
                                                params.k);
    ok = ok && conn.ok();
    svs[i] = conn.start_vertex;
    gvs[i] = conn.goal_vertex;
    connected.push_back(std::move(conn.roadmap));
  }
  if (ok) {
    for (size_t i = 0; i < n; ++i) {
      std::optional<int> d = unconstrained_duration(connected[i], svs[i], gvs[i], dt);
      if (!d) {
        ok = false;
        break;
      }
      durations.push_back(*d);
    }
  }
  if (!ok) {
    if (used_roadmaps) *used_roadmaps = std::move(connected);
    return out;
  }
  int horizon = params.horizon > 0 ? params.horizon : auto_horizon(durations);

  std::vector<TimedPath> paths(n);
  MovingObstacles obstacles;
  bool failed = false;
  for (int agent : priority_order) {
    if (deadline.expired()) {
      failed = true;
      break;
    }
    std::optional<TimedPath> p = dynamic_obstacle_path(connected[agent], robots[agent],
                                                       svs[agent], gvs[agent], obstacles, dt,
                                                       horizon);
    if (!p) {
      failed = true;
      break;
    }
    p->agent = agent;
    paths[agent] = std::move(*p);
    obstacles.robots.push_back(&robots[agent]);
    obstacles.tables.push_back(discretize_path(paths[agent], connected[agent], robots[agent],
                                               paths[agent].duration(), dt));
    obstacles.latest = std::max(obstacles.latest, paths[agent].duration());
  }
  if (!failed) {
    out.solved = true;
    out.solution.paths = std::move(paths);
    out.solution.cost = group_cost(out.solution.paths, params.metric, dt);
  }
  if (used_roadmaps) *used_roadmaps = std::move(connected);
  return out;
}

PlanResult decoupled_prm_plan(const Environment& env, const std::vector<RobotModel>& robots,
                              const std::vector<Configuration>& starts,
                              const std::vector<Configuration>& goals,
                              const std::vector<int>& priority_order,
                              const PlannerParams& params) {
  const size_t n = robots.size();
  if (n == 0 || starts.size() != n || goals.size() != n)
    throw std::invalid_argument("decoupled_prm_plan: mismatched agent counts");
  std::vector<int> order = priority_order;
  if (order.empty()) {
    order.resize(n);
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  }

  Deadline deadline = Deadline::after(params.budget_seconds);
  double dt = params.dt > 0 ? params.dt : auto_dt(robots);

  PlanResult result;
  result.dt = dt;
  result.metric = params.metric;
  SolveStats totals;

  std::vector<Roadmap> current;
  for (size_t i = 0; i < n; ++i)
    current.push_back(build_roadmap(env, robots[i], resolved_n0(robots[i], params), params.k,
                                    mix64(params.seed, i, 0)));

  long long round = 0;
  while (!deadline.expired()) {
    std::vector<Roadmap> used;
    ++totals.replans;
    DecoupledQueryResult qr = decoupled_query_on_roadmaps(env, current, robots, starts, goals,
                                                          order, params, &used, nullptr, deadline);
    if (qr.solved) {
      result.status = PlanStatus::Solved;
      result.solution = std::move(qr.solution);
      result.solution.cost = group_cost(result.solution.paths, params.metric, dt);
      result.solution.stats = totals;
      result.solution.stats.growth_rounds = round;
      result.roadmaps = std::move(used);
      for (const TimedPath& p : result.solution.paths) {
        result.start_vertices.push_back(p.vertices.front());
        result.goal_vertices.push_back(p.vertices.back());
      }
      return result;
    }
    current = std::move(used);
    if (deadline.expired()) break;
    int growth_base = params.growth;
    for (size_t i = 0; i < n && !deadline.expired(); ++i) {
      int add = growth_base > 0 ? growth_base : resolved_n0(robots[i], params);
      current[i] = grow_roadmap(current[i], env, robots[i], add, params.k,
                                mix64(params.seed, i, round + 1));
    }
    ++round;
  }
  result.status = PlanStatus::Timeout;
  result.solution.stats = totals;
  result.solution.stats.growth_rounds = round;
  result.roadmaps = std::move(current);
  return result;
}

// ---------------------------------------------------------------------------
// Joint oracle
// ---------------------------------------------------------------------------

namespace {

// Per-agent position: done at goal, waiting at a vertex, or k of d steps
// into an edge. Encoded as 4 ints for hashing.
struct AgentPos {
  enum class Mode { Done, AtVertex, OnEdge };
  Mode mode = Mode::Done;
  int vertex = -1;  // AtVertex
  int from = -1, to = -1, step = 0;  // OnEdge

  void encode(int32_t* out) const {
    out[0] = static_cast<int32_t>(mode);
    out[1] = mode == Mode::AtVertex ? vertex : from;
    out[2] = to;
    out[3] = step;
  }
};

struct JointState {
  std::vector<AgentPos> agents;

  std::vector<int32_t> key() const {
    std::vector<int32_t> k(agents.size() * 4);
    for (size_t i = 0; i < agents.size(); ++i) agents[i].encode(&k[i * 4]);
    return k;
  }
};

struct KeyHash {
  size_t operator()(const std::vector<int32_t>& k) const {
    size_t h = 1469598103934665603ULL;
    for (int32_t v : k) {
      h ^= static_cast<uint32_t>(v);
      h *= 1099511628211ULL;
    }
    return h;
  }
};

}  // namespace

OracleResult joint_oracle(const std::vector<Roadmap>& roadmaps,
                          const std::vector<RobotModel>& robots,
                          const std::vector<int>& start_vertices,
                          const std::vector<int>& goal_vertices, CostMetric metric, double dt,
                          int horizon, long long state_bound) {
  const size_t n = robots.size();
  OracleResult result;

  auto edge_steps = [&](size_t a, int from, int to) {
    return ceil_steps(roadmaps[a].edge_weight(from, to), dt);
  };
  auto config_of = [&](size_t a, const AgentPos& p) -> Configuration {
    switch (p.mode) {
      case AgentPos::Mode::Done:
        return roadmaps[a].vertices[goal_vertices[a]];
      case AgentPos::Mode::AtVertex:
        return roadmaps[a].vertices[p.vertex];
      case AgentPos::Mode::OnEdge: {
        int d = edge_steps(a, p.from, p.to);
        double s = static_cast<double>(p.step) / d;
        return interpolate(robots[a], roadmaps[a].vertices[p.from], roadmaps[a].vertices[p.to], s);
      }
    }
    return {};
  };

  JointState init;
  init.agents.resize(n);
  for (size_t a = 0; a < n; ++a) {
    if (start_vertices[a] == goal_vertices[a]) {
      init.agents[a].mode = AgentPos::Mode::Done;
    } else {
      init.agents[a].mode = AgentPos::Mode::AtVertex;
      init.agents[a].vertex = start_vertices[a];
    }
  }
  {
    std::vector<Configuration> configs(n);
    for (size_t a = 0; a < n; ++a) configs[a] = config_of(a, init.agents[a]);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j)
        if (in_collision_pair(robots[i], configs[i], robots[j], configs[j])) {
          result.status = OracleResult::Status::Infeasible;
          return result;
        }
  }

  using Key = std::vector<int32_t>;
  struct Node {
    long long g_units;  // metric units: timesteps weighted by active agents (soc) or 1 (makespan)
    long long order;
    Key key;
    int elapsed;
    bool operator>(const Node& o) const {
      if (g_units != o.g_units) return g_units > o.g_units;
      return order > o.order;
    }
  };

  std::unordered_map<Key, std::pair<Key, int>, KeyHash> parent;  // key -> (parent key, elapsed)
  std::unordered_map<Key, long long, KeyHash> best;
  std::unordered_map<Key, JointState, KeyHash> states;
  std::priority_queue<Node, std::vector<Node>, std::greater<>> open;

  Key init_key = init.key();
  states[init_key] = init;
  best[init_key] = 0;
  parent[init_key] = {Key{}, 0};
  long long order_counter = 0;
  open.push({0, order_counter++, init_key, 0});

  auto all_done = [&](const JointState& s) {
    for (const AgentPos& p : s.agents)
      if (p.mode != AgentPos::Mode::Done) return false;
    return true;
  };

  Key goal_key;
  bool found = false;
  long long goal_units = 0;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    auto it = best.find(node.key);
    if (it == best.end() || node.g_units > it->second) continue;
    const JointState state = states[node.key];

    if (all_done(state)) {
      found = true;
      goal_key = node.key;
      goal_units = node.g_units;
      break;
    }
    if (node.elapsed >= horizon) continue;

    long long active = 0;
    for (const AgentPos& p : state.agents)
      if (p.mode != AgentPos::Mode::Done) ++active;
    long long step_units = metric == CostMetric::SumOfCosts ? active : 1;

    // Per-agent move options after one timestep.
    std::vector<std::vector<AgentPos>> options(n);
    bool dead = false;
    for (size_t a = 0; a < n && !dead; ++a) {
      const AgentPos& p = state.agents[a];
      if (p.mode == AgentPos::Mode::Done) {
        options[a].push_back(p);
      } else if (p.mode == AgentPos::Mode::OnEdge) {
        int d = edge_steps(a, p.from, p.to);
        AgentPos next;
        if (p.step + 1 == d) {
          if (p.to == goal_vertices[a]) {
            next.mode = AgentPos::Mode::Done;
          } else {
            next.mode = AgentPos::Mode::AtVertex;
            next.vertex = p.to;
          }
        } else {
          next.mode = AgentPos::Mode::OnEdge;
          next.from = p.from;
          next.to = p.to;
          next.step = p.step + 1;
        }
        options[a].push_back(next);
      } else {
        for (const Roadmap::Edge& e : roadmaps[a].adjacency[p.vertex]) {
          int d = edge_steps(a, p.vertex, e.to);
          AgentPos next;
          if (d == 1) {
            if (e.to == goal_vertices[a]) {
              next.mode = AgentPos::Mode::Done;
            } else {
              next.mode = AgentPos::Mode::AtVertex;
              next.vertex = e.to;
            }
          } else {
            next.mode = AgentPos::Mode::OnEdge;
            next.from = p.vertex;
            next.to = e.to;
            next.step = 1;
          }
          options[a].push_back(next);
        }
        if (options[a].empty()) dead = true;  // no waiting: stuck off-goal
      }
    }
    if (dead) continue;

    // Enumerate the product of options.
    std::vector<size_t> pick(n, 0);
    std::vector<Configuration> configs(n);
    while (true) {
      JointState succ;
      succ.agents.resize(n);
      for (size_t a = 0; a < n; ++a) succ.agents[a] = options[a][pick[a]];
      bool collision = false;
      for (size_t a = 0; a < n; ++a) configs[a] = config_of(a, succ.agents[a]);
      for (size_t i = 0; i < n && !collision; ++i)
        for (size_t j = i + 1; j < n && !collision; ++j)
          if (in_collision_pair(robots[i], configs[i], robots[j], configs[j])) collision = true;
      if (!collision) {
        Key k = succ.key();
        long long g = node.g_units + step_units;
        auto bit = best.find(k);
        if (bit == best.end() || g < bit->second) {
          if (bit == best.end() &&
              static_cast<long long>(best.size()) >= state_bound) {
            result.status = OracleResult::Status::BoundExceeded;
            result.states_explored = static_cast<long long>(best.size());
            return result;
          }
          best[k] = g;
          states[k] = succ;
          parent[k] = {node.key, node.elapsed + 1};
          open.push({g, order_counter++, std::move(k), node.elapsed + 1});
        }
      }
      // advance product counter
      size_t a = 0;
      while (a < n) {
        if (++pick[a] < options[a].size()) break;
        pick[a] = 0;
        ++a;
      }
      if (a == n) break;
    }
  }

  result.states_explored = static_cast<long long>(best.size());
  if (!found) {
    result.status = OracleResult::Status::Infeasible;
    return result;
  }

  // Walk the parent chain back to the root, then extract per-agent arrivals.
  std::vector<Key> chain;
  for (Key k = goal_key; !k.empty(); k = parent[k].first) chain.push_back(k);
  std::reverse(chain.begin(), chain.end());

  result.paths.assign(n, {});
  for (size_t a = 0; a < n; ++a) {
    TimedPath& p = result.paths[a];
    p.agent = static_cast<int>(a);
    p.vertices.push_back(start_vertices[a]);
    p.arrival.push_back(0);
    for (size_t t = 1; t < chain.size(); ++t) {
      const AgentPos& cur = states[chain[t]].agents[a];
      const AgentPos& prev = states[chain[t - 1]].agents[a];
      bool arrived_vertex =
          cur.mode == AgentPos::Mode::AtVertex &&
          !(prev.mode == AgentPos::Mode::AtVertex && prev.vertex == cur.vertex);
      bool arrived_done =
          cur.mode == AgentPos::Mode::Done && prev.mode != AgentPos::Mode::Done;
      if (arrived_vertex) {
        p.vertices.push_back(cur.vertex);
        p.arrival.push_back(static_cast<int>(t));
      } else if (arrived_done) {
        p.vertices.push_back(goal_vertices[a]);
        p.arrival.push_back(static_cast<int>(t));
      }
    }
    p.cost = p.duration() * dt;
  }
  result.status = OracleResult::Status::Optimal;
  result.cost = static_cast<double>(goal_units) * dt;
  return result;
}

}  // namespace cbsmp
