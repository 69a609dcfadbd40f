#include "cbsmp/cbs.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <queue>
#include <sstream>

#include "cbsmp/rng.hpp"

namespace cbsmp {

const char* metric_name(CostMetric m) {
  return m == CostMetric::SumOfCosts ? "soc" : "makespan";
}

std::optional<CostMetric> metric_from_name(const std::string& name) {
  if (name == "soc" || name == "sum-of-costs") return CostMetric::SumOfCosts;
  if (name == "makespan") return CostMetric::Makespan;
  return std::nullopt;
}

double group_cost(const std::vector<TimedPath>& paths, CostMetric metric, double dt) {
  if (paths.empty()) throw std::invalid_argument("group_cost requires at least one path");
  long long steps = 0;
  if (metric == CostMetric::SumOfCosts) {
    for (const TimedPath& p : paths) steps += p.duration();
  } else {
    for (const TimedPath& p : paths) steps = std::max<long long>(steps, p.duration());
  }
  return static_cast<double>(steps) * dt;
}

static std::vector<Constraint> constraints_for_agent(const std::vector<Constraint>& all,
                                                     int agent) {
  std::vector<Constraint> out;
  for (const Constraint& c : all)
    if (c.agent == agent) out.push_back(c);
  return out;
}

std::optional<CTNode> make_child(const QueryContext& ctx, const CTNode& node,
                                 const Conflict& conflict, int constrained_agent,
                                 SolveStats& stats) {
  const int other = constrained_agent == conflict.agent_i ? conflict.agent_j : conflict.agent_i;
  Constraint added;
  added.agent = constrained_agent;
  added.timestep = conflict.timestep;
  added.other_robot = ctx.robots[other];
  added.other_config = constrained_agent == conflict.agent_i ? conflict.config_j : conflict.config_i;

  for (const Constraint& c : node.constraints)
    if (c.same_as(added)) return std::nullopt;  // cannot change the replan

  CTNode child;
  child.parent_id = node.node_id;
  child.constraints = node.constraints;
  child.constraints.push_back(added);

  ++stats.replans;
  std::optional<TimedPath> path = constrained_shortest_path(
      ctx.roadmaps[constrained_agent], ctx.robots[constrained_agent],
      ctx.start_vertices[constrained_agent], ctx.goal_vertices[constrained_agent],
      constraints_for_agent(child.constraints, constrained_agent), ctx.dt, ctx.horizon);
  if (!path) return std::nullopt;
  path->agent = constrained_agent;
  path->cost = path->duration() * ctx.dt;

  child.paths = node.paths;
  child.paths[constrained_agent] = std::move(*path);
  child.cost = group_cost(child.paths, ctx.metric, ctx.dt);
  return child;
}

std::vector<CTNode> expand_node(const QueryContext& ctx, const CTNode& node,
                                const Conflict& conflict, SolveStats& stats) {
  std::vector<CTNode> children;
  for (int agent : {conflict.agent_i, conflict.agent_j}) {
    std::optional<CTNode> child = make_child(ctx, node, conflict, agent, stats);
    if (child) children.push_back(std::move(*child));
  }
  return children;
}

QueryResult cbs_query(const QueryContext& ctx, long long max_ct_nodes, const Deadline& deadline) {
  const size_t n = ctx.robots.size();
  if (ctx.roadmaps.size() != n || ctx.start_vertices.size() != n || ctx.goal_vertices.size() != n)
    throw std::invalid_argument("cbs_query: mismatched agent counts");

  QueryResult result;
  SolveStats& stats = result.stats;

  CTNode root;
  root.node_id = 0;
  root.paths.resize(n);
  for (size_t i = 0; i < n; ++i) {
    if (deadline.expired()) {
      result.status = QueryStatus::DeadlineHit;
      return result;
    }
    ++stats.replans;
    std::optional<TimedPath> path =
        constrained_shortest_path(ctx.roadmaps[i], ctx.robots[i], ctx.start_vertices[i],
                                  ctx.goal_vertices[i], {}, ctx.dt, ctx.horizon);
    if (!path) {
      result.status = QueryStatus::Infeasible;
      return result;
    }
    path->agent = static_cast<int>(i);
    path->cost = path->duration() * ctx.dt;
    root.paths[i] = std::move(*path);
  }
  root.cost = group_cost(root.paths, ctx.metric, ctx.dt);
  root.conflict = find_first_conflict(root.paths, ctx.roadmaps, ctx.robots, ctx.dt);
  if (root.conflict) ++stats.conflicts_found;

  std::deque<CTNode> nodes;
  nodes.push_back(std::move(root));
  long long generated = 1;

  struct OpenKey {
    double cost;
    int conflicted;
    long long id;
    bool operator>(const OpenKey& o) const {
      if (cost != o.cost) return cost > o.cost;
      if (conflicted != o.conflicted) return conflicted > o.conflicted;
      return id > o.id;
    }
  };
  std::priority_queue<OpenKey, std::vector<OpenKey>, std::greater<>> open;
  open.push({nodes[0].cost, nodes[0].conflict ? 1 : 0, 0});

  while (!open.empty()) {
    if (deadline.expired()) {
      result.status = QueryStatus::DeadlineHit;
      stats.ct_generated = generated;
      return result;
    }
    OpenKey key = open.top();
    open.pop();
    const CTNode& node = nodes[key.id];
    ++stats.ct_expanded;
    if (ctx.on_expand) ctx.on_expand(node);

    if (!node.conflict) {
      result.status = QueryStatus::Solved;
      result.solution.paths = node.paths;
      result.solution.cost = node.cost;
      stats.ct_generated = generated;
      result.solution.stats = stats;
      return result;
    }

    for (int agent : {node.conflict->agent_i, node.conflict->agent_j}) {
      if (max_ct_nodes > 0 && generated >= max_ct_nodes) {
        result.status = QueryStatus::Exhausted;
        stats.ct_generated = generated;
        return result;
      }
      std::optional<CTNode> child = make_child(ctx, node, *node.conflict, agent, stats);
      if (!child) continue;
      child->node_id = generated++;
      child->conflict = find_first_conflict(child->paths, ctx.roadmaps, ctx.robots, ctx.dt);
      if (child->conflict) ++stats.conflicts_found;
      open.push({child->cost, child->conflict ? 1 : 0, child->node_id});
      nodes.push_back(std::move(*child));
    }
  }
  stats.ct_generated = generated;
  result.status = QueryStatus::Infeasible;
  return result;
}

int resolved_n0(const RobotModel& robot, const PlannerParams& params) {
  if (params.n0 > 0) return params.n0;
  return robot.kind == RobotKind::Chain ? 128 : 64;
}

double auto_dt(const std::vector<RobotModel>& robots) {
  double min_feature = std::numeric_limits<double>::infinity();
  double max_tip_speed = 0;
  for (const RobotModel& r : robots) {
    min_feature = std::min(min_feature, r.feature_radius());
    max_tip_speed = std::max(max_tip_speed, r.max_speed * r.reach());
  }
  return 0.5 * min_feature / max_tip_speed;
}

int auto_horizon(const std::vector<int>& unconstrained_durations) {
  int makespan = 0;
  for (int d : unconstrained_durations) makespan = std::max(makespan, d);
  return std::max(4 * makespan, 256);
}

namespace {

struct ConnectedRound {
  std::vector<Roadmap> roadmaps;
  std::vector<int> start_vertices;
  std::vector<int> goal_vertices;
  bool endpoints_ok = false;
  bool reachable = false;
  std::vector<int> durations;
};

ConnectedRound connect_round(const Environment& env, const std::vector<Roadmap>& base,
                             const std::vector<RobotModel>& robots,
                             const std::vector<Configuration>& starts,
                             const std::vector<Configuration>& goals, int k, double dt) {
  ConnectedRound out;
  out.endpoints_ok = true;
  out.reachable = true;
  for (size_t i = 0; i < robots.size(); ++i) {
    EndpointConnection conn = connect_endpoints(base[i], env, robots[i], starts[i], goals[i], k);
    out.endpoints_ok = out.endpoints_ok && conn.ok();
    out.start_vertices.push_back(conn.start_vertex);
    out.goal_vertices.push_back(conn.goal_vertex);
    out.roadmaps.push_back(std::move(conn.roadmap));
  }
  if (!out.endpoints_ok) {
    out.reachable = false;
    return out;
  }
  for (size_t i = 0; i < robots.size(); ++i) {
    std::optional<int> d =
        unconstrained_duration(out.roadmaps[i], out.start_vertices[i], out.goal_vertices[i], dt);
    if (!d) {
      out.reachable = false;
      return out;
    }
    out.durations.push_back(*d);
  }
  return out;
}

}  // namespace

PlanResult plan(const Environment& env, const std::vector<RobotModel>& robots,
                const std::vector<Configuration>& starts, const std::vector<Configuration>& goals,
                const PlannerParams& params) {
  const size_t n = robots.size();
  if (n == 0 || starts.size() != n || goals.size() != n)
    throw std::invalid_argument("plan: mismatched agent counts");
  if (params.k < 1) throw std::invalid_argument("plan: k must be >= 1");

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
  while (true) {
    ConnectedRound conn;
    if (!deadline.expired()) {
      conn = connect_round(env, current, robots, starts, goals, params.k, dt);
      if (conn.reachable) {
        QueryContext ctx{conn.roadmaps, robots,        conn.start_vertices, conn.goal_vertices,
                         params.metric, dt,            0};
        ctx.horizon = params.horizon > 0 ? params.horizon : auto_horizon(conn.durations);
        QueryResult qr = cbs_query(ctx, params.max_ct_nodes, deadline);
        totals.ct_expanded += qr.stats.ct_expanded;
        totals.ct_generated += qr.stats.ct_generated;
        totals.replans += qr.stats.replans;
        totals.conflicts_found += qr.stats.conflicts_found;
        if (qr.status == QueryStatus::Solved) {
          result.status = PlanStatus::Solved;
          result.solution = std::move(qr.solution);
          result.solution.stats = totals;
          result.solution.stats.growth_rounds = round;
          result.solution.cost = group_cost(result.solution.paths, params.metric, dt);
          result.roadmaps = std::move(conn.roadmaps);
          result.start_vertices = conn.start_vertices;
          result.goal_vertices = conn.goal_vertices;
          return result;
        }
      }
      if (!conn.roadmaps.empty()) current = std::move(conn.roadmaps);
    }
    if (deadline.expired()) {
      result.status = PlanStatus::Timeout;
      result.solution.stats = totals;
      result.solution.stats.growth_rounds = round;
      result.roadmaps = std::move(current);
      return result;
    }
    int growth_base = params.growth;
    for (size_t i = 0; i < n && !deadline.expired(); ++i) {
      int add = growth_base > 0 ? growth_base : resolved_n0(robots[i], params);
      current[i] = grow_roadmap(current[i], env, robots[i], add, params.k,
                                mix64(params.seed, i, round + 1));
    }
    ++round;
  }
}

QueryResult query_on_roadmaps(const Environment& env, const std::vector<Roadmap>& roadmaps,
                              const std::vector<RobotModel>& robots,
                              const std::vector<Configuration>& starts,
                              const std::vector<Configuration>& goals,
                              const PlannerParams& params, std::vector<Roadmap>* used_roadmaps,
                              double* used_dt) {
  double dt = params.dt > 0 ? params.dt : auto_dt(robots);
  ConnectedRound conn = connect_round(env, roadmaps, robots, starts, goals, params.k, dt);
  if (used_dt) *used_dt = dt;
  if (!conn.reachable) {
    if (used_roadmaps) *used_roadmaps = std::move(conn.roadmaps);
    QueryResult r;
    r.status = QueryStatus::Infeasible;
    return r;
  }
  QueryContext ctx{conn.roadmaps, robots,        conn.start_vertices, conn.goal_vertices,
                   params.metric, dt,            0};
  ctx.horizon = params.horizon > 0 ? params.horizon : auto_horizon(conn.durations);
  QueryResult qr = cbs_query(ctx, params.max_ct_nodes, Deadline::after(params.budget_seconds));
  if (used_roadmaps) *used_roadmaps = std::move(conn.roadmaps);
  return qr;
}

std::string save_solution(const Solution& solution, const std::vector<Roadmap>& roadmaps,
                          const std::vector<RobotModel>& robots, double dt, CostMetric metric) {
  std::ostringstream out;
  char buf[64];
  int t_max = 0;
  for (const TimedPath& p : solution.paths) t_max = std::max(t_max, p.duration());
  out << "solution\n";
  out << "metric " << metric_name(metric) << "\n";
  std::snprintf(buf, sizeof buf, "%.12g", solution.cost);
  out << "cost " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", dt);
  out << "dt " << buf << "\n";
  const SolveStats& s = solution.stats;
  out << "stats " << s.ct_expanded << " " << s.ct_generated << " " << s.growth_rounds << " "
      << s.replans << " " << s.conflicts_found << "\n";
  out << "agents " << solution.paths.size() << "\n";
  for (size_t i = 0; i < solution.paths.size(); ++i) {
    const TimedPath& p = solution.paths[i];
    out << "agent " << robots[i].id << " " << robots[i].dof() << " " << (t_max + 1) << "\n";
    for (int t = 0; t <= t_max; ++t) {
      Configuration q = config_at_timestep(p, roadmaps[i], robots[i], t, dt);
      out << "c " << t;
      for (double x : q.values) {
        std::snprintf(buf, sizeof buf, "%.12g", x);
        out << " " << buf;
      }
      out << "\n";
    }
  }
  return out.str();
}

SolutionFile load_solution(const std::string& text) {
  std::istringstream in(text);
  SolutionFile f;
  std::string tag, word;
  if (!(in >> tag) || tag != "solution") throw std::runtime_error("solution: bad header");
  if (!(in >> tag >> word) || tag != "metric") throw std::runtime_error("solution: bad metric");
  std::optional<CostMetric> m = metric_from_name(word);
  if (!m) throw std::runtime_error("solution: unknown metric " + word);
  f.metric = *m;
  if (!(in >> tag >> f.cost) || tag != "cost") throw std::runtime_error("solution: bad cost");
  if (!(in >> tag >> f.dt) || tag != "dt") throw std::runtime_error("solution: bad dt");
  if (!(in >> tag >> f.stats.ct_expanded >> f.stats.ct_generated >> f.stats.growth_rounds >>
        f.stats.replans >> f.stats.conflicts_found) ||
      tag != "stats")
    throw std::runtime_error("solution: bad stats");
  size_t agents = 0;
  if (!(in >> tag >> agents) || tag != "agents") throw std::runtime_error("solution: bad agents");
  for (size_t i = 0; i < agents; ++i) {
    std::string id;
    int dof = 0, steps = 0;
    if (!(in >> tag >> id >> dof >> steps) || tag != "agent")
      throw std::runtime_error("solution: bad agent header");
    std::vector<Configuration> traj;
    for (int t = 0; t < steps; ++t) {
      int tt;
      if (!(in >> tag >> tt) || tag != "c") throw std::runtime_error("solution: bad config line");
      Configuration q;
      q.values.resize(dof);
      for (int d = 0; d < dof; ++d)
        if (!(in >> q.values[d])) throw std::runtime_error("solution: bad config value");
      traj.push_back(std::move(q));
    }
    f.agent_ids.push_back(id);
    f.trajectories.push_back(std::move(traj));
  }
  return f;
}

}  // namespace cbsmp
