#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cbsmp/bench.hpp"
#include "cbsmp/svg.hpp"

namespace fs = std::filesystem;
using namespace cbsmp;

namespace {

constexpr int kExitSolved = 0;
constexpr int kExitError = 1;
constexpr int kExitTimeout = 2;
constexpr int kExitInfeasible = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

void echo_config(const PlannerParams& p) {
  std::cout << "config: n0=" << p.n0 << " growth=" << p.growth << " k=" << p.k << " dt=" << p.dt
            << " max_ct_nodes=" << p.max_ct_nodes << " metric=" << metric_name(p.metric)
            << " horizon=" << p.horizon << " budget_seconds=" << p.budget_seconds
            << " seed=" << p.seed << "\n";
}

std::vector<Roadmap> load_roadmap_dir(const Scenario& sc, const std::string& dir) {
  std::vector<Roadmap> out;
  for (const RobotModel& r : sc.robots) {
    fs::path p = fs::path(dir) / (r.id + ".roadmap");
    out.push_back(load_roadmap_file(p.string()));
  }
  return out;
}

int cmd_plan(const std::string& scenario_path, const std::string& planner,
             const std::string& out_path, const std::string& roadmap_dir,
             const std::string& save_roadmap_dir, long long seed, double budget, bool verbose) {
  Scenario sc = load_scenario_file(scenario_path);
  PlannerParams params = sc.params;
  if (seed >= 0) params.seed = static_cast<uint64_t>(seed);
  if (budget >= 0) params.budget_seconds = budget;
  if (verbose) echo_config(params);
  if (sc.unsolvable_start_overlap)
    std::cerr << "warning: starts mutually collide; instance is unsolvable\n";

  std::vector<TimedPath> paths;
  std::vector<Roadmap> roadmaps;
  double dt = 0;
  bool solved = false;
  bool infeasible = false;
  SolveStats stats;
  double cost = 0;

  if (!roadmap_dir.empty()) {
    // query phase only, on externally supplied roadmaps
    std::vector<Roadmap> base = load_roadmap_dir(sc, roadmap_dir);
    if (planner == "cbs") {
      QueryResult qr = query_on_roadmaps(sc.env, base, sc.robots, sc.starts, sc.goals, params,
                                         &roadmaps, &dt);
      solved = qr.status == QueryStatus::Solved;
      infeasible = !solved;
      if (solved) {
        paths = qr.solution.paths;
        stats = qr.solution.stats;
        cost = qr.solution.cost;
      }
    } else if (planner == "decoupled") {
      std::vector<int> order(sc.robots.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      DecoupledQueryResult dq = decoupled_query_on_roadmaps(sc.env, base, sc.robots, sc.starts,
                                                            sc.goals, order, params, &roadmaps,
                                                            &dt);
      solved = dq.solved;
      infeasible = !solved;
      if (solved) {
        paths = dq.solution.paths;
        cost = dq.solution.cost;
      }
    } else {
      std::cerr << "error: --roadmaps supports planners cbs and decoupled\n";
      return kExitError;
    }
  } else {
    PlanResult result;
    if (planner == "cbs") {
      result = plan(sc.env, sc.robots, sc.starts, sc.goals, params);
    } else if (planner == "composite") {
      result = composite_prm_plan(sc.env, sc.robots, sc.starts, sc.goals, params);
    } else if (planner == "decoupled") {
      result = decoupled_prm_plan(sc.env, sc.robots, sc.starts, sc.goals, {}, params);
    } else {
      std::cerr << "error: unknown planner '" << planner << "'\n";
      return kExitError;
    }
    solved = result.status == PlanStatus::Solved;
    dt = result.dt;
    roadmaps = std::move(result.roadmaps);
    stats = result.solution.stats;
    if (solved) {
      paths = result.solution.paths;
      cost = result.solution.cost;
    }
  }

  if (!save_roadmap_dir.empty()) {
    fs::create_directories(save_roadmap_dir);
    for (const Roadmap& r : roadmaps)
      save_roadmap_file(r, (fs::path(save_roadmap_dir) / (r.agent_id + ".roadmap")).string());
  }

  if (!solved) {
    if (infeasible) {
      std::cout << "infeasible on the given roadmaps\n";
      return kExitInfeasible;
    }
    std::cout << "timeout after " << params.budget_seconds << " s\n";
    return kExitTimeout;
  }

  Solution solution;
  solution.paths = paths;
  solution.cost = cost;
  solution.stats = stats;
  if (!out_path.empty())
    write_file(out_path, save_solution(solution, roadmaps, sc.robots, dt, params.metric));
  std::cout << "solved cost=" << cost << " dt=" << dt
            << " ct_generated=" << stats.ct_generated << " growth_rounds=" << stats.growth_rounds
            << "\n";
  if (verbose) {
    for (const TimedPath& p : paths)
      if (!p.spatially_simple())
        std::cout << "note: agent " << p.agent << " follows a spatially non-simple path\n";
  }
  return kExitSolved;
}

int cmd_bench(const std::string& suite_path, int seeds, double budget, const std::string& csv,
              int jobs, bool shared, int rounds) {
  std::vector<Scenario> scenarios;
  std::vector<std::string> planners;
  std::istringstream in(read_file(suite_path));
  std::string line;
  fs::path suite_dir = fs::path(suite_path).parent_path();
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag, value;
    ls >> tag >> value;
    if (tag == "scenario") {
      fs::path p = value;
      if (p.is_relative() && !fs::exists(p)) p = suite_dir / p;
      scenarios.push_back(load_scenario_file(p.string()));
    } else if (tag == "planner") {
      planners.push_back(value);
    } else {
      std::cerr << "error: " << suite_path << ":" << lineno << ": unknown directive '" << tag
                << "'\n";
      return kExitError;
    }
  }

  if (shared) {
    std::ostringstream csv_out;
    csv_out << "scenario,seed,round,cbs_solved,cbs_cost,dec_solved,dec_cost,hashes_match\n";
    for (const Scenario& sc : scenarios) {
      for (int seed = 0; seed < seeds; ++seed) {
        std::vector<SharedRoundRecord> recs = shared_roadmap_rounds(sc, rounds, seed);
        for (const SharedRoundRecord& r : recs) {
          bool match = r.cbs_input_hashes == r.dec_input_hashes;
          csv_out << sc.name << "," << seed << "," << r.round << "," << r.cbs_solved << ","
                  << (r.cbs_solved ? std::to_string(r.cbs_cost) : "") << "," << r.dec_solved
                  << "," << (r.dec_solved ? std::to_string(r.dec_cost) : "") << "," << match
                  << "\n";
        }
      }
    }
    if (!csv.empty()) write_file(csv, csv_out.str());
    std::cout << csv_out.str();
    return kExitSolved;
  }

  BenchOptions options;
  options.seeds = seeds;
  options.budget_seconds = budget;
  options.jobs = jobs;
  std::vector<RunRecord> records = run_benchmark(scenarios, planners, options);
  if (!csv.empty()) write_file(csv, records_to_csv(records));
  std::cout << summarize(records);
  return kExitSolved;
}

int cmd_oracle(const std::string& scenario_path, const std::string& roadmap_dir, long long bound) {
  Scenario sc = load_scenario_file(scenario_path);
  std::vector<Roadmap> base = load_roadmap_dir(sc, roadmap_dir);
  double dt = sc.params.dt > 0 ? sc.params.dt : auto_dt(sc.robots);

  std::vector<Roadmap> connected;
  std::vector<int> svs, gvs, durations;
  for (size_t i = 0; i < sc.robots.size(); ++i) {
    EndpointConnection conn =
        connect_endpoints(base[i], sc.env, sc.robots[i], sc.starts[i], sc.goals[i], sc.params.k);
    if (!conn.ok()) {
      std::cout << "infeasible: endpoints disconnected for " << sc.robots[i].id << "\n";
      return kExitInfeasible;
    }
    svs.push_back(conn.start_vertex);
    gvs.push_back(conn.goal_vertex);
    connected.push_back(std::move(conn.roadmap));
    std::optional<int> d = unconstrained_duration(connected[i], svs[i], gvs[i], dt);
    if (!d) {
      std::cout << "infeasible: no individual path for " << sc.robots[i].id << "\n";
      return kExitInfeasible;
    }
    durations.push_back(*d);
  }
  int horizon = sc.params.horizon > 0 ? sc.params.horizon : auto_horizon(durations);
  OracleResult res =
      joint_oracle(connected, sc.robots, svs, gvs, sc.params.metric, dt, horizon, bound);
  switch (res.status) {
    case OracleResult::Status::Optimal:
      std::cout << "optimal cost=" << res.cost << " states=" << res.states_explored << "\n";
      return kExitSolved;
    case OracleResult::Status::Infeasible:
      std::cout << "infeasible states=" << res.states_explored << "\n";
      return kExitInfeasible;
    case OracleResult::Status::BoundExceeded:
      std::cerr << "error: state bound exceeded (" << res.states_explored << ")\n";
      return kExitError;
  }
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cbsmp: multi-agent motion planning with conflict-based roadmap search"};
  app.require_subcommand(1);

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "plan one scenario");
  std::string scenario_path, planner = "cbs", out_path, roadmap_dir, save_roadmap_dir;
  long long seed_override = -1;
  double budget_override = -1;
  bool verbose = false;
  plan_cmd->add_option("scenario", scenario_path)->required();
  plan_cmd->add_option("--planner", planner)->check(CLI::IsMember({"cbs", "composite", "decoupled"}));
  plan_cmd->add_option("--out", out_path, "solution file");
  plan_cmd->add_option("--roadmaps", roadmap_dir, "query pre-built roadmaps from this directory");
  plan_cmd->add_option("--save-roadmaps", save_roadmap_dir, "write the used roadmaps here");
  plan_cmd->add_option("--seed", seed_override);
  plan_cmd->add_option("--budget", budget_override, "seconds");
  plan_cmd->add_flag("-v,--verbose", verbose);

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "generate a scenario");
  auto* gen_crossing_cmd = gen_cmd->add_subcommand("crossing");
  int agents = 4;
  double radius = 0.5, density = 16.0;
  long long gen_seed = 1;
  std::string gen_out;
  gen_crossing_cmd->add_option("--agents", agents)->required();
  gen_crossing_cmd->add_option("--radius", radius);
  gen_crossing_cmd->add_option("--density", density, "free area per robot");
  gen_crossing_cmd->add_option("--seed", gen_seed);
  gen_crossing_cmd->add_option("--out", gen_out)->required();
  auto* gen_arms_cmd = gen_cmd->add_subcommand("arms");
  int arms = 2, links = 2;
  gen_arms_cmd->add_option("--arms", arms)->required();
  gen_arms_cmd->add_option("--links", links);
  gen_arms_cmd->add_option("--seed", gen_seed);
  gen_arms_cmd->add_option("--out", gen_out)->required();
  gen_cmd->require_subcommand(1);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark suite");
  std::string suite_path, csv_path;
  int seeds = 1, jobs = 1, rounds = 4;
  double bench_budget = -1;
  bool shared = false;
  bench_cmd->add_option("suite", suite_path)->required();
  bench_cmd->add_option("--seeds", seeds);
  bench_cmd->add_option("--budget", bench_budget, "seconds per run");
  bench_cmd->add_option("--csv", csv_path);
  bench_cmd->add_option("--jobs", jobs);
  bench_cmd->add_flag("--shared", shared, "shared-roadmap head-to-head rounds");
  bench_cmd->add_option("--rounds", rounds, "growth rounds in shared mode");

  // render
  auto* render_cmd = app.add_subcommand("render", "render a scenario to svg");
  std::string render_scenario, render_solution, svg_path;
  render_cmd->add_option("scenario", render_scenario)->required();
  render_cmd->add_option("--solution", render_solution);
  render_cmd->add_option("--svg", svg_path)->required();

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive joint optimum on given roadmaps");
  std::string oracle_scenario, oracle_roadmaps;
  long long oracle_bound = 10'000'000;
  oracle_cmd->add_option("scenario", oracle_scenario)->required();
  oracle_cmd->add_option("--roadmaps", oracle_roadmaps)->required();
  oracle_cmd->add_option("--bound", oracle_bound, "joint state cap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan_cmd)
      return cmd_plan(scenario_path, planner, out_path, roadmap_dir, save_roadmap_dir,
                      seed_override, budget_override, verbose);
    if (*gen_cmd) {
      Scenario sc = *gen_crossing_cmd
                        ? gen_crossing(agents, radius, density, static_cast<uint64_t>(gen_seed))
                        : gen_arms(arms, links, static_cast<uint64_t>(gen_seed));
      save_scenario_file(sc, gen_out);
      std::cout << "wrote " << gen_out << "\n";
      return kExitSolved;
    }
    if (*bench_cmd)
      return cmd_bench(suite_path, seeds, bench_budget, csv_path, jobs, shared, rounds);
    if (*render_cmd) {
      Scenario sc = load_scenario_file(render_scenario);
      if (render_solution.empty()) {
        render_svg_file(sc, nullptr, svg_path);
      } else {
        SolutionFile sol = load_solution(read_file(render_solution));
        render_svg_file(sc, &sol, svg_path);
      }
      std::cout << "wrote " << svg_path << "\n";
      return kExitSolved;
    }
    if (*oracle_cmd) return cmd_oracle(oracle_scenario, oracle_roadmaps, oracle_bound);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
