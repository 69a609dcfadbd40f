#include "cbsmp/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cbsmp/rng.hpp"

namespace cbsmp {

void Scenario::validate() {
  env.validate();
  if (robots.empty()) throw ScenarioValidationError("scenario has no robots");
  if (starts.size() != robots.size() || goals.size() != robots.size())
    throw ScenarioValidationError("each robot needs exactly one start and one goal");
  for (size_t i = 0; i < robots.size(); ++i) {
    robots[i].validate();
    for (size_t j = i + 1; j < robots.size(); ++j)
      if (robots[i].id == robots[j].id)
        throw ScenarioValidationError("duplicate robot id " + robots[i].id);
    if (starts[i].dof() != robots[i].dof())
      throw ScenarioValidationError("start of robot " + robots[i].id + " has wrong dof");
    if (goals[i].dof() != robots[i].dof())
      throw ScenarioValidationError("goal of robot " + robots[i].id + " has wrong dof");
    if (!is_valid_config(env, robots[i], starts[i]))
      throw ScenarioValidationError("start of robot " + robots[i].id + " is not a valid configuration");
    if (!is_valid_config(env, robots[i], goals[i]))
      throw ScenarioValidationError("goal of robot " + robots[i].id + " is not a valid configuration");
  }
  unsolvable_start_overlap = false;
  for (size_t i = 0; i < robots.size(); ++i)
    for (size_t j = i + 1; j < robots.size(); ++j)
      if (in_collision_pair(robots[i], starts[i], robots[j], starts[j]))
        unsolvable_start_overlap = true;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string save_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "scenario " << s.name << "\n";
  out << "bounds " << fmt(s.env.bounds.min.x) << " " << fmt(s.env.bounds.min.y) << " "
      << fmt(s.env.bounds.max.x) << " " << fmt(s.env.bounds.max.y) << "\n";
  for (const ConvexPolygon& obs : s.env.obstacles) {
    out << "obstacle " << obs.vertices.size();
    for (const Vec2& v : obs.vertices) out << " " << fmt(v.x) << " " << fmt(v.y);
    out << "\n";
  }
  for (const RobotModel& r : s.robots) {
    switch (r.kind) {
      case RobotKind::Disk:
        out << "robot " << r.id << " disk " << fmt(r.radius) << " " << fmt(r.max_speed) << "\n";
        break;
      case RobotKind::Polygon:
        out << "robot " << r.id << " polygon " << fmt(r.max_speed) << " "
            << r.body.vertices.size();
        for (const Vec2& v : r.body.vertices) out << " " << fmt(v.x) << " " << fmt(v.y);
        out << "\n";
        break;
      case RobotKind::Chain:
        out << "robot " << r.id << " chain " << fmt(r.base.x) << " " << fmt(r.base.y) << " "
            << fmt(r.link_width) << " " << fmt(r.max_speed) << " " << r.link_lengths.size();
        for (double l : r.link_lengths) out << " " << fmt(l);
        out << "\n";
        break;
    }
  }
  for (size_t i = 0; i < s.robots.size(); ++i) {
    out << "start " << s.robots[i].id;
    for (double v : s.starts[i].values) out << " " << fmt(v);
    out << "\n";
    out << "goal " << s.robots[i].id;
    for (double v : s.goals[i].values) out << " " << fmt(v);
    out << "\n";
  }
  const PlannerParams& p = s.params;
  out << "param n0 " << p.n0 << "\n";
  out << "param growth " << p.growth << "\n";
  out << "param k " << p.k << "\n";
  out << "param dt " << fmt(p.dt) << "\n";
  out << "param max_ct_nodes " << p.max_ct_nodes << "\n";
  out << "param metric " << metric_name(p.metric) << "\n";
  out << "param horizon " << p.horizon << "\n";
  out << "param budget_seconds " << fmt(p.budget_seconds) << "\n";
  out << "param seed " << p.seed << "\n";
  return out.str();
}

Scenario load_scenario(const std::string& text) {
  Scenario s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_bounds = false;
  std::map<std::string, int> robot_index;
  std::map<std::string, Configuration> starts, goals;
  std::vector<std::string> robot_order;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto need = [&](auto&... vals) {
      if (!(ls >> ... >> vals)) throw ScenarioParseError(lineno, "malformed '" + tag + "' line");
    };
    if (tag == "scenario") {
      need(s.name);
    } else if (tag == "bounds") {
      need(s.env.bounds.min.x, s.env.bounds.min.y, s.env.bounds.max.x, s.env.bounds.max.y);
      have_bounds = true;
    } else if (tag == "obstacle") {
      size_t count = 0;
      need(count);
      ConvexPolygon poly;
      for (size_t i = 0; i < count; ++i) {
        Vec2 v;
        need(v.x, v.y);
        poly.vertices.push_back(v);
      }
      s.env.obstacles.push_back(std::move(poly));
    } else if (tag == "robot") {
      RobotModel r;
      std::string kind;
      need(r.id, kind);
      if (robot_index.count(r.id)) throw ScenarioParseError(lineno, "duplicate robot " + r.id);
      if (kind == "disk") {
        r.kind = RobotKind::Disk;
        need(r.radius, r.max_speed);
      } else if (kind == "polygon") {
        r.kind = RobotKind::Polygon;
        size_t count = 0;
        need(r.max_speed, count);
        for (size_t i = 0; i < count; ++i) {
          Vec2 v;
          need(v.x, v.y);
          r.body.vertices.push_back(v);
        }
      } else if (kind == "chain") {
        r.kind = RobotKind::Chain;
        size_t count = 0;
        need(r.base.x, r.base.y, r.link_width, r.max_speed, count);
        for (size_t i = 0; i < count; ++i) {
          double l;
          need(l);
          r.link_lengths.push_back(l);
        }
      } else {
        throw ScenarioParseError(lineno, "unknown robot kind '" + kind + "'");
      }
      robot_index[r.id] = static_cast<int>(s.robots.size());
      robot_order.push_back(r.id);
      s.robots.push_back(std::move(r));
    } else if (tag == "start" || tag == "goal") {
      std::string id;
      need(id);
      if (!robot_index.count(id))
        throw ScenarioParseError(lineno, tag + " references unknown robot " + id);
      Configuration q;
      double v;
      while (ls >> v) q.values.push_back(v);
      if (q.values.empty()) throw ScenarioParseError(lineno, tag + " has no coordinates");
      auto& dest = tag == "start" ? starts : goals;
      if (dest.count(id)) throw ScenarioParseError(lineno, "duplicate " + tag + " for " + id);
      dest[id] = std::move(q);
    } else if (tag == "param") {
      std::string key;
      need(key);
      PlannerParams& p = s.params;
      if (key == "n0") need(p.n0);
      else if (key == "growth") need(p.growth);
      else if (key == "k") need(p.k);
      else if (key == "dt") need(p.dt);
      else if (key == "max_ct_nodes") need(p.max_ct_nodes);
      else if (key == "metric") {
        std::string m;
        need(m);
        std::optional<CostMetric> metric = metric_from_name(m);
        if (!metric) throw ScenarioParseError(lineno, "unknown metric '" + m + "'");
        p.metric = *metric;
      } else if (key == "horizon") need(p.horizon);
      else if (key == "budget_seconds") need(p.budget_seconds);
      else if (key == "seed") need(p.seed);
      else throw ScenarioParseError(lineno, "unknown param '" + key + "'");
    } else {
      throw ScenarioParseError(lineno, "unknown directive '" + tag + "'");
    }
  }
  if (!have_bounds) throw ScenarioParseError(lineno, "missing bounds");
  for (const std::string& id : robot_order) {
    if (!starts.count(id)) throw ScenarioParseError(lineno, "robot " + id + " has no start");
    if (!goals.count(id)) throw ScenarioParseError(lineno, "robot " + id + " has no goal");
    s.starts.push_back(starts[id]);
    s.goals.push_back(goals[id]);
  }
  s.validate();
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

void save_scenario_file(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << save_scenario(s);
}

Scenario gen_crossing(int num_agents, double agent_radius, double density_per_robot,
                      uint64_t seed) {
  if (num_agents < 2 || num_agents % 2 != 0)
    throw std::invalid_argument("gen_crossing: num_agents must be even and >= 2");
  if (agent_radius <= 0 || density_per_robot <= 0)
    throw std::invalid_argument("gen_crossing: radius and density must be positive");

  Scenario s;
  s.name = "crossing" + std::to_string(num_agents);
  double side = std::sqrt(num_agents * density_per_robot);
  s.env.bounds = {{0, 0}, {side, side}};

  int half = num_agents / 2;
  double margin = 2.0 * agent_radius;
  auto make_robot = [&](int idx) {
    RobotModel r;
    r.id = "a" + std::to_string(idx);
    r.kind = RobotKind::Disk;
    r.radius = agent_radius;
    r.max_speed = 1.0;
    return r;
  };
  for (int i = 0; i < half; ++i) {  // left -> right
    double y = side * (i + 1) / (half + 1);
    s.robots.push_back(make_robot(i));
    s.starts.push_back({{margin, y}});
    s.goals.push_back({{side - margin, y}});
  }
  for (int j = 0; j < half; ++j) {  // bottom -> top
    double x = side * (j + 1) / (half + 1);
    s.robots.push_back(make_robot(half + j));
    s.starts.push_back({{x, margin}});
    s.goals.push_back({{x, side - margin}});
  }

  s.params.n0 = 64;
  s.params.seed = seed;
  s.validate();
  if (s.unsolvable_start_overlap)
    throw InfeasibleGenerationError(
        "gen_crossing: starts overlap; raise density_per_robot or shrink the radius");
  return s;
}

Scenario gen_arms(int num_arms, int links, uint64_t seed) {
  if (num_arms < 2) throw std::invalid_argument("gen_arms: num_arms must be >= 2");
  if (links < 2) throw std::invalid_argument("gen_arms: links must be >= 2");

  const double link_length = 1.0;
  const double link_width = 0.2;
  const double reach = links * link_length;
  const double ring = 0.85 * reach;  // base circle radius; arms overreach the center
  const double half_extent = ring + reach + 0.5 + link_width;

  Scenario s;
  s.name = "arms" + std::to_string(num_arms) + "x" + std::to_string(links);
  s.env.bounds = {{-half_extent, -half_extent}, {half_extent, half_extent}};

  for (int i = 0; i < num_arms; ++i) {
    RobotModel r;
    r.id = "arm" + std::to_string(i);
    r.kind = RobotKind::Chain;
    r.max_speed = 1.0;
    r.link_width = link_width;
    r.link_lengths.assign(links, link_length);
    double phi = 2.0 * kPi * i / num_arms;
    r.base = {ring * std::cos(phi), ring * std::sin(phi)};
    s.robots.push_back(std::move(r));
  }

  auto pose = [&](int i, double first, double rest_sign, double rest) {
    double phi = 2.0 * kPi * i / num_arms;
    Configuration q;
    q.values.push_back(wrap_to_pi(first + phi));
    for (int k = 1; k < links; ++k) {
      double v = rest_sign == 0 ? rest : rest * (k % 2 == 1 ? rest_sign : -rest_sign);
      q.values.push_back(wrap_to_pi(v));
    }
    return q;
  };
  auto team_valid = [&](const std::vector<Configuration>& configs) {
    for (size_t i = 0; i < configs.size(); ++i)
      if (!is_valid_config(s.env, s.robots[i], configs[i])) return false;
    for (size_t i = 0; i < configs.size(); ++i)
      for (size_t j = i + 1; j < configs.size(); ++j)
        if (in_collision_pair(s.robots[i], configs[i], s.robots[j], configs[j])) return false;
    return true;
  };
  auto tip_near_center = [&](const std::vector<Configuration>& configs) {
    for (size_t i = 0; i < configs.size(); ++i) {
      std::vector<Vec2> pts = chain_points(s.robots[i], configs[i]);
      if (pts.back().norm() > 0.7 * ring) return false;
    }
    return true;
  };

  Rng rng(mix64(seed, 0xa7));
  bool start_found = false;
  for (int attempt = 0; attempt < 1000 && !start_found; ++attempt) {
    double twist1 = kPi + 0.35 + rng.uniform(-0.15, 0.15);
    double twist2 = 0.30 + rng.uniform(-0.15, 0.15);
    std::vector<Configuration> candidate;
    for (int i = 0; i < num_arms; ++i) candidate.push_back(pose(i, twist1, 0, twist2));
    if (team_valid(candidate) && tip_near_center(candidate)) {
      s.starts = std::move(candidate);
      start_found = true;
    }
  }
  if (!start_found)
    throw InfeasibleGenerationError("gen_arms: no valid interleaved start in 1000 attempts");

  bool goal_found = false;
  for (int attempt = 0; attempt < 1000 && !goal_found; ++attempt) {
    double fold = 2.2 + rng.uniform(-0.15, 0.15);
    std::vector<Configuration> candidate;
    for (int i = 0; i < num_arms; ++i) candidate.push_back(pose(i, 0.0, 1.0, fold));
    if (team_valid(candidate)) {
      s.goals = std::move(candidate);
      goal_found = true;
    }
  }
  if (!goal_found)
    throw InfeasibleGenerationError("gen_arms: no valid folded goal in 1000 attempts");

  s.params.n0 = 128;
  s.params.max_ct_nodes = 16;  // favors simpler solutions on entangled teams
  s.params.seed = seed;
  s.validate();
  return s;
}

}  // namespace cbsmp
