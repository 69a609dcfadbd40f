#include "cbsmp/roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "cbsmp/rng.hpp"

namespace cbsmp {

int Roadmap::edge_count() const {
  size_t total = 0;
  for (const auto& nbrs : adjacency) total += nbrs.size();
  return static_cast<int>(total / 2);
}

bool Roadmap::has_edge(int i, int j) const {
  for (const Edge& e : adjacency[i])
    if (e.to == j) return true;
  return false;
}

double Roadmap::edge_weight(int i, int j) const {
  for (const Edge& e : adjacency[i])
    if (e.to == j) return e.weight;
  return std::numeric_limits<double>::quiet_NaN();
}

void Roadmap::add_edge(int i, int j, double weight) {
  auto insert_sorted = [](std::vector<Edge>& nbrs, Edge e) {
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), e.to,
                               [](const Edge& a, int to) { return a.to < to; });
    nbrs.insert(it, e);
  };
  insert_sorted(adjacency[i], {j, weight});
  insert_sorted(adjacency[j], {i, weight});
}

bool TimedPath::spatially_simple() const {
  std::vector<int> sorted = vertices;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

int ceil_steps(double weight, double dt) {
  int steps = static_cast<int>(std::ceil(weight / dt - 1e-9));
  return std::max(1, steps);
}

static Configuration sample_configuration(const Environment& env, const RobotModel& robot,
                                          Rng& rng) {
  Configuration q;
  q.values.resize(robot.dof());
  if (robot.kind == RobotKind::Chain) {
    for (double& v : q.values) v = rng.uniform(-kPi, kPi);
  } else {
    q.values[0] = rng.uniform(env.bounds.min.x, env.bounds.max.x);
    q.values[1] = rng.uniform(env.bounds.min.y, env.bounds.max.y);
  }
  return q;
}

// Connect vertex i to its k nearest neighbors among [0, limit) \ {i}.
static void connect_k_nearest(Roadmap& r, const Environment& env, const RobotModel& robot, int i,
                              int k, double step) {
  std::vector<std::pair<double, int>> candidates;
  candidates.reserve(r.vertices.size());
  for (int j = 0; j < r.vertex_count(); ++j) {
    if (j == i) continue;
    candidates.emplace_back(cspace_distance(robot, r.vertices[i], r.vertices[j]), j);
  }
  std::sort(candidates.begin(), candidates.end());
  int attempts = std::min<int>(k, static_cast<int>(candidates.size()));
  for (int c = 0; c < attempts; ++c) {
    auto [dist, j] = candidates[c];
    if (dist <= 0) continue;  // duplicate sample, never a positive-weight edge
    if (r.has_edge(i, j)) continue;
    if (is_valid_edge(env, robot, r.vertices[i], r.vertices[j], step))
      r.add_edge(i, j, dist / robot.max_speed);
  }
}

static void sample_into(Roadmap& r, const Environment& env, const RobotModel& robot, int n,
                        uint64_t seed) {
  Rng rng(seed);
  long long max_attempts = 100LL * n;
  int added = 0;
  for (long long attempt = 0; attempt < max_attempts && added < n; ++attempt) {
    Configuration q = sample_configuration(env, robot, rng);
    if (is_valid_config(env, robot, q)) {
      r.vertices.push_back(std::move(q));
      r.adjacency.emplace_back();
      ++added;
    }
  }
  if (added < 1)
    throw SamplingExhaustedError("no valid sample for agent " + robot.id + " after " +
                                 std::to_string(max_attempts) + " attempts");
  r.seed_lineage.emplace_back(seed, added);
}

Roadmap build_roadmap(const Environment& env, const RobotModel& robot, int n, int k,
                      uint64_t seed) {
  if (n < 1 || k < 1) throw std::invalid_argument("build_roadmap requires n >= 1 and k >= 1");
  Roadmap r;
  r.agent_id = robot.id;
  sample_into(r, env, robot, n, seed);
  double step = default_edge_step(robot);
  for (int i = 0; i < r.vertex_count(); ++i) connect_k_nearest(r, env, robot, i, k, step);
  return r;
}

Roadmap grow_roadmap(const Roadmap& old, const Environment& env, const RobotModel& robot,
                     int n_additional, int k, uint64_t seed) {
  if (n_additional < 1) throw std::invalid_argument("grow_roadmap requires n_additional >= 1");
  Roadmap r = old;
  int first_new = r.vertex_count();
  sample_into(r, env, robot, n_additional, seed);
  double step = default_edge_step(robot);
  for (int i = first_new; i < r.vertex_count(); ++i) connect_k_nearest(r, env, robot, i, k, step);
  return r;
}

EndpointConnection connect_endpoints(const Roadmap& old, const Environment& env,
                                     const RobotModel& robot, const Configuration& start,
                                     const Configuration& goal, int k) {
  EndpointConnection out;
  out.roadmap = old;
  Roadmap& r = out.roadmap;
  double step = default_edge_step(robot);

  auto insert_or_find = [&](const Configuration& q) {
    for (int j = 0; j < r.vertex_count(); ++j)
      if (cspace_distance(robot, q, r.vertices[j]) <= 1e-9) return j;
    r.vertices.push_back(q);
    r.adjacency.emplace_back();
    return r.vertex_count() - 1;
  };

  out.start_vertex = insert_or_find(start);
  connect_k_nearest(r, env, robot, out.start_vertex, k, step);
  out.goal_vertex = insert_or_find(goal);
  connect_k_nearest(r, env, robot, out.goal_vertex, k, step);

  bool trivial = out.start_vertex == out.goal_vertex;
  out.start_connected = trivial || !r.adjacency[out.start_vertex].empty();
  out.goal_connected = trivial || !r.adjacency[out.goal_vertex].empty();
  return out;
}

std::optional<int> unconstrained_duration(const Roadmap& r, int start_vertex, int goal_vertex,
                                          double dt) {
  const int n = r.vertex_count();
  std::vector<int> dist(n, std::numeric_limits<int>::max());
  using Item = std::pair<int, int>;  // (steps, vertex)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[start_vertex] = 0;
  open.emplace(0, start_vertex);
  while (!open.empty()) {
    auto [d, v] = open.top();
    open.pop();
    if (d > dist[v]) continue;
    if (v == goal_vertex) return d;
    for (const Roadmap::Edge& e : r.adjacency[v]) {
      int nd = d + ceil_steps(e.weight, dt);
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        open.emplace(nd, e.to);
      }
    }
  }
  return std::nullopt;
}

namespace {

// Constraints bucketed by timestep for edge-window queries.
class ConstraintIndex {
 public:
  explicit ConstraintIndex(const std::vector<Constraint>& constraints) {
    for (const Constraint& c : constraints) sorted_.emplace_back(c.timestep, &c);
    std::sort(sorted_.begin(), sorted_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  // True iff traversing q_from -> q_to departing at `depart` over `steps`
  // timesteps collides with a constraint inside the occupied window.
  bool blocks(const RobotModel& robot, const Configuration& q_from, const Configuration& q_to,
              int depart, int steps) const {
    if (sorted_.empty()) return false;
    auto it = std::lower_bound(sorted_.begin(), sorted_.end(), depart + 1,
                               [](const auto& a, int t) { return a.first < t; });
    for (; it != sorted_.end() && it->first <= depart + steps; ++it) {
      const Constraint& c = *it->second;
      double s = static_cast<double>(c.timestep - depart) / steps;
      Configuration q = interpolate(robot, q_from, q_to, s);
      if (in_collision_pair(robot, q, c.other_robot, c.other_config)) return true;
    }
    return false;
  }

 private:
  std::vector<std::pair<int, const Constraint*>> sorted_;
};

}  // namespace

std::optional<TimedPath> constrained_shortest_path(const Roadmap& r, const RobotModel& robot,
                                                   int start_vertex, int goal_vertex,
                                                   const std::vector<Constraint>& constraints,
                                                   double dt, int horizon) {
  if (dt <= 0) throw std::invalid_argument("dt must be positive");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");

  TimedPath path;
  path.vertices = {start_vertex};
  path.arrival = {0};
  if (start_vertex == goal_vertex) return path;

  const int n = r.vertex_count();
  ConstraintIndex index(constraints);
  auto idx = [n](int t, int v) { return static_cast<size_t>(t) * n + v; };

  // Forward layer sweep: cost of a state (v, t) is exactly t, so processing
  // layers in time order is Dijkstra on this DAG.
  std::vector<uint8_t> reach(static_cast<size_t>(horizon + 1) * n, 0);
  reach[idx(0, start_vertex)] = 1;
  int goal_time = -1;
  for (int t = 0; t <= horizon && goal_time < 0; ++t) {
    if (reach[idx(t, goal_vertex)]) {
      goal_time = t;
      break;
    }
    for (int v = 0; v < n; ++v) {
      if (!reach[idx(t, v)]) continue;
      for (const Roadmap::Edge& e : r.adjacency[v]) {
        int steps = ceil_steps(e.weight, dt);
        int t2 = t + steps;
        if (t2 > horizon || reach[idx(t2, e.to)]) continue;
        if (!index.blocks(robot, r.vertices[v], r.vertices[e.to], t, steps))
          reach[idx(t2, e.to)] = 1;
      }
    }
  }
  if (goal_time < 0) return std::nullopt;

  // Backward marking of states that still reach (goal, goal_time).
  std::vector<uint8_t> leads(static_cast<size_t>(goal_time + 1) * n, 0);
  leads[idx(goal_time, goal_vertex)] = 1;
  for (int t = goal_time - 1; t >= 0; --t) {
    for (int v = 0; v < n; ++v) {
      if (!reach[idx(t, v)]) continue;
      for (const Roadmap::Edge& e : r.adjacency[v]) {
        int steps = ceil_steps(e.weight, dt);
        int t2 = t + steps;
        if (t2 > goal_time || !leads[idx(t2, e.to)]) continue;
        if (!index.blocks(robot, r.vertices[v], r.vertices[e.to], t, steps)) {
          leads[idx(t, v)] = 1;
          break;
        }
      }
    }
  }

  // Greedy reconstruction; adjacency is sorted by neighbor index, so taking
  // the first viable neighbor yields the lexicographically smallest optimal
  // vertex sequence.
  int v = start_vertex;
  int t = 0;
  while (v != goal_vertex) {
    bool advanced = false;
    for (const Roadmap::Edge& e : r.adjacency[v]) {
      int steps = ceil_steps(e.weight, dt);
      int t2 = t + steps;
      if (t2 > goal_time || !leads[idx(t2, e.to)]) continue;
      if (index.blocks(robot, r.vertices[v], r.vertices[e.to], t, steps)) continue;
      path.vertices.push_back(e.to);
      path.arrival.push_back(t2);
      v = e.to;
      t = t2;
      advanced = true;
      break;
    }
    if (!advanced) return std::nullopt;  // unreachable if marking is sound
  }
  path.cost = path.duration() * dt;
  return path;
}

std::string save_roadmap(const Roadmap& r) {
  std::ostringstream out;
  char buf[64];
  out << "roadmap " << r.agent_id << "\n";
  out << "vertices " << r.vertex_count() << "\n";
  out << "edges " << r.edge_count() << "\n";
  out << "lineage " << r.seed_lineage.size();
  for (const auto& [seed, count] : r.seed_lineage) out << " " << seed << " " << count;
  out << "\n";
  for (int i = 0; i < r.vertex_count(); ++i) {
    out << "v " << i;
    for (double x : r.vertices[i].values) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << " " << buf;
    }
    out << "\n";
  }
  for (int i = 0; i < r.vertex_count(); ++i) {
    for (const Roadmap::Edge& e : r.adjacency[i]) {
      if (e.to < i) continue;
      std::snprintf(buf, sizeof buf, "%.12g", e.weight);
      out << "e " << i << " " << e.to << " " << buf << "\n";
    }
  }
  return out.str();
}

Roadmap load_roadmap(const std::string& text) {
  std::istringstream in(text);
  Roadmap r;
  std::string tag;
  int n = 0, m = 0;
  size_t lineage = 0;
  if (!(in >> tag >> r.agent_id) || tag != "roadmap")
    throw std::runtime_error("roadmap: bad header");
  if (!(in >> tag >> n) || tag != "vertices") throw std::runtime_error("roadmap: bad vertex count");
  if (!(in >> tag >> m) || tag != "edges") throw std::runtime_error("roadmap: bad edge count");
  if (!(in >> tag >> lineage) || tag != "lineage") throw std::runtime_error("roadmap: bad lineage");
  for (size_t i = 0; i < lineage; ++i) {
    uint64_t seed;
    int count;
    if (!(in >> seed >> count)) throw std::runtime_error("roadmap: bad lineage entry");
    r.seed_lineage.emplace_back(seed, count);
  }
  r.vertices.resize(n);
  r.adjacency.resize(n);
  std::string line;
  std::getline(in, line);
  int seen_edges = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "v") {
      int i;
      ls >> i;
      if (i < 0 || i >= n) throw std::runtime_error("roadmap: vertex index out of range");
      double x;
      while (ls >> x) r.vertices[i].values.push_back(x);
    } else if (tag == "e") {
      int i, j;
      double w;
      if (!(ls >> i >> j >> w)) throw std::runtime_error("roadmap: bad edge line");
      r.add_edge(i, j, w);
      ++seen_edges;
    } else {
      throw std::runtime_error("roadmap: unknown line tag '" + tag + "'");
    }
  }
  if (seen_edges != m) throw std::runtime_error("roadmap: edge count mismatch");
  return r;
}

void save_roadmap_file(const Roadmap& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << save_roadmap(r);
}

Roadmap load_roadmap_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_roadmap(ss.str());
}

}  // namespace cbsmp
