#include "cbsmp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "cbsmp/rng.hpp"

namespace cbsmp {

bool independent_scan_clean(const std::vector<TimedPath>& paths,
                            const std::vector<Roadmap>& roadmaps,
                            const std::vector<RobotModel>& robots, double dt) {
  const size_t n = paths.size();
  int t_max = 0;
  for (const TimedPath& p : paths) t_max = std::max(t_max, p.duration());
  for (int t = 0; t <= t_max; ++t) {
    std::vector<Configuration> configs(n);
    for (size_t i = 0; i < n; ++i)
      configs[i] = config_at_timestep(paths[i], roadmaps[i], robots[i], t, dt);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j)
        if (in_collision_pair(robots[i], configs[i], robots[j], configs[j])) return false;
  }
  return true;
}

RunRecord run_single(const Scenario& scenario, const std::string& planner, uint64_t seed,
                     double budget_override) {
  RunRecord rec;
  rec.scenario = scenario.name;
  rec.planner = planner;
  rec.seed = seed;
  if (scenario.unsolvable_start_overlap) rec.flags = "unsolvable-start";

  PlannerParams params = scenario.params;
  params.seed = seed;
  if (budget_override >= 0) params.budget_seconds = budget_override;

  auto t0 = std::chrono::steady_clock::now();
  PlanResult result;
  if (planner == "cbs") {
    result = plan(scenario.env, scenario.robots, scenario.starts, scenario.goals, params);
  } else if (planner == "composite") {
    result = composite_prm_plan(scenario.env, scenario.robots, scenario.starts, scenario.goals,
                                params);
  } else if (planner == "decoupled") {
    result = decoupled_prm_plan(scenario.env, scenario.robots, scenario.starts, scenario.goals,
                                {}, params);
  } else {
    throw std::invalid_argument("unknown planner '" + planner + "'");
  }
  auto t1 = std::chrono::steady_clock::now();
  rec.planning_seconds = std::chrono::duration<double>(t1 - t0).count();

  rec.stats = result.solution.stats;
  for (const Roadmap& r : result.roadmaps) rec.roadmap_vertices.push_back(r.vertex_count());
  if (result.status == PlanStatus::Solved) {
    rec.outcome = "solved";
    rec.cost = result.solution.cost;
    if (!independent_scan_clean(result.solution.paths, result.roadmaps, scenario.robots,
                                result.dt))
      rec.outcome = "invalid";
  } else {
    rec.outcome = "timeout";
  }
  return rec;
}

std::vector<RunRecord> run_benchmark(const std::vector<Scenario>& scenarios,
                                     const std::vector<std::string>& planners,
                                     const BenchOptions& options) {
  if (scenarios.empty() || planners.empty())
    throw std::invalid_argument("run_benchmark: scenarios and planners must be non-empty");

  struct Task {
    const Scenario* scenario;
    const std::string* planner;
    uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const Scenario& s : scenarios)
    for (const std::string& p : planners)
      for (int seed = 0; seed < options.seeds; ++seed)
        tasks.push_back({&s, &p, static_cast<uint64_t>(seed)});

  std::vector<RunRecord> records(tasks.size());
  int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (size_t i = 0; i < tasks.size(); ++i)
      records[i] = run_single(*tasks[i].scenario, *tasks[i].planner, tasks[i].seed,
                              options.budget_seconds);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        records[i] = run_single(*tasks[i].scenario, *tasks[i].planner, tasks[i].seed,
                                options.budget_seconds);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return records;
}

const char* const kCsvHeader =
    "scenario,planner,seed,outcome,planning_seconds,cost,roadmap_vertices,ct_expanded,"
    "ct_generated,growth_rounds,replans,conflicts_found,flags";

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  char buf[64];
  out << kCsvHeader << "\n";
  for (const RunRecord& r : records) {
    out << r.scenario << "," << r.planner << "," << r.seed << "," << r.outcome << ",";
    std::snprintf(buf, sizeof buf, "%.6f", r.planning_seconds);
    out << buf << ",";
    if (r.outcome == "solved") {
      std::snprintf(buf, sizeof buf, "%.12g", r.cost);
      out << buf;
    }
    out << ",";
    for (size_t i = 0; i < r.roadmap_vertices.size(); ++i) {
      if (i) out << ";";
      out << r.roadmap_vertices[i];
    }
    out << "," << r.stats.ct_expanded << "," << r.stats.ct_generated << ","
        << r.stats.growth_rounds << "," << r.stats.replans << "," << r.stats.conflicts_found
        << "," << r.flags << "\n";
  }
  return out.str();
}

std::string summarize(const std::vector<RunRecord>& records) {
  struct Agg {
    int runs = 0;
    int solved = 0;
    std::vector<double> times;
    double cost_sum = 0;
    double vertex_sum = 0;
    int vertex_counts = 0;
  };
  std::map<std::pair<std::string, std::string>, Agg> groups;
  for (const RunRecord& r : records) {
    Agg& a = groups[{r.scenario, r.planner}];
    ++a.runs;
    if (r.outcome == "solved") {
      ++a.solved;
      a.times.push_back(r.planning_seconds);
      a.cost_sum += r.cost;
    }
    for (int v : r.roadmap_vertices) {
      a.vertex_sum += v;
      ++a.vertex_counts;
    }
  }
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-18s %-10s %6s %8s %10s %10s %10s %10s", "scenario", "planner",
                "runs", "success", "med_time", "mean_time", "mean_cost", "mean_verts");
  out << buf << "\n";
  for (auto& [key, a] : groups) {
    std::sort(a.times.begin(), a.times.end());
    double median = a.times.empty()
                        ? std::nan("")
                        : (a.times.size() % 2 ? a.times[a.times.size() / 2]
                                              : 0.5 * (a.times[a.times.size() / 2 - 1] +
                                                       a.times[a.times.size() / 2]));
    double mean = std::nan(""), mean_cost = std::nan("");
    if (!a.times.empty()) {
      mean = 0;
      for (double t : a.times) mean += t;
      mean /= a.times.size();
      mean_cost = a.cost_sum / a.solved;
    }
    double mean_verts = a.vertex_counts ? a.vertex_sum / a.vertex_counts : std::nan("");
    std::snprintf(buf, sizeof buf, "%-18s %-10s %6d %7.0f%% %10.3f %10.3f %10.3f %10.1f",
                  key.first.c_str(), key.second.c_str(), a.runs, 100.0 * a.solved / a.runs,
                  median, mean, mean_cost, mean_verts);
    out << buf << "\n";
  }
  return out.str();
}

std::string fnv1a_hex(const std::string& text) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<SharedRoundRecord> shared_roadmap_rounds(const Scenario& scenario, int rounds,
                                                     uint64_t seed) {
  PlannerParams params = scenario.params;
  params.seed = seed;
  params.max_ct_nodes = 0;  // representation-optimality needs the full tree

  std::vector<Roadmap> base;
  for (size_t i = 0; i < scenario.robots.size(); ++i)
    base.push_back(build_roadmap(scenario.env, scenario.robots[i],
                                 resolved_n0(scenario.robots[i], params), params.k,
                                 mix64(params.seed, i, 0)));

  std::vector<SharedRoundRecord> out;
  for (int round = 1; round <= rounds; ++round) {
    SharedRoundRecord rec;
    rec.round = round;

    // Both planners consume the same serialized bytes.
    std::vector<std::string> texts;
    for (const Roadmap& r : base) texts.push_back(save_roadmap(r));

    std::vector<Roadmap> cbs_input;
    for (const std::string& t : texts) {
      cbs_input.push_back(load_roadmap(t));
      rec.cbs_input_hashes.push_back(fnv1a_hex(t));
    }
    std::vector<Roadmap> cbs_used;
    double cbs_dt = 0;
    QueryResult qr = query_on_roadmaps(scenario.env, cbs_input, scenario.robots, scenario.starts,
                                       scenario.goals, params, &cbs_used, &cbs_dt);
    rec.cbs_solved = qr.status == QueryStatus::Solved;
    if (rec.cbs_solved) {
      rec.cbs_cost = qr.solution.cost;
      rec.cbs_scan_clean =
          independent_scan_clean(qr.solution.paths, cbs_used, scenario.robots, cbs_dt);
    }

    std::vector<Roadmap> dec_input;
    for (const std::string& t : texts) {
      dec_input.push_back(load_roadmap(t));
      rec.dec_input_hashes.push_back(fnv1a_hex(t));
    }
    std::vector<int> order(scenario.robots.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::vector<Roadmap> dec_used;
    double dec_dt = 0;
    DecoupledQueryResult dq =
        decoupled_query_on_roadmaps(scenario.env, dec_input, scenario.robots, scenario.starts,
                                    scenario.goals, order, params, &dec_used, &dec_dt);
    rec.dec_solved = dq.solved;
    if (rec.dec_solved) {
      rec.dec_cost = dq.solution.cost;
      rec.dec_scan_clean =
          independent_scan_clean(dq.solution.paths, dec_used, scenario.robots, dec_dt);
    }

    out.push_back(std::move(rec));
    if (round < rounds) {
      for (size_t i = 0; i < base.size(); ++i) {
        int add = params.growth > 0 ? params.growth : resolved_n0(scenario.robots[i], params);
        base[i] = grow_roadmap(base[i], scenario.env, scenario.robots[i], add, params.k,
                               mix64(params.seed, i, round));
      }
    }
  }
  return out;
}

}  // namespace cbsmp
