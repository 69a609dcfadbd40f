#include <doctest.h>

#include "cbsmp/baselines.hpp"
#include "cbsmp/bench.hpp"
#include "helpers.hpp"

using namespace cbsmp;
using fixtures::cfg;

TEST_CASE("joint configuration validity") {
  Environment env = fixtures::empty_box(10);
  std::vector<RobotModel> robots{fixtures::disk("a", 1.0), fixtures::disk("b", 1.0)};

  JointConfiguration apart{{cfg({2, 2}), cfg({8, 8})}};
  CHECK(joint_config_valid(env, robots, apart));

  JointConfiguration overlapping{{cfg({5, 5}), cfg({6, 5})}};
  CHECK_FALSE(joint_config_valid(env, robots, overlapping));

  JointConfiguration out_of_bounds{{cfg({0.2, 5}), cfg({8, 8})}};
  CHECK_FALSE(joint_config_valid(env, robots, out_of_bounds));
  CHECK(overlapping.total_dof() == 4);
}

TEST_CASE("composite with one agent reduces to single-agent planning") {
  Environment env = fixtures::empty_box(20);
  env.obstacles.push_back(fixtures::square(10, 10, 2));
  std::vector<RobotModel> robots{fixtures::disk("a", 0.5)};
  std::vector<Configuration> starts{cfg({2, 2})};
  std::vector<Configuration> goals{cfg({18, 18})};
  PlannerParams params;
  params.n0 = 32;
  params.seed = 6;
  params.budget_seconds = 30;

  PlanResult composite = composite_prm_plan(env, robots, starts, goals, params);
  PlanResult single = plan(env, robots, starts, goals, params);
  REQUIRE(composite.status == PlanStatus::Solved);
  REQUIRE(single.status == PlanStatus::Solved);
  CHECK(composite.solution.cost == doctest::Approx(single.solution.cost));
}

TEST_CASE("composite keeps far-apart agents near their decoupled optimum") {
  Environment env = fixtures::empty_box(60);
  std::vector<RobotModel> robots{fixtures::disk("a", 0.5), fixtures::disk("b", 0.5)};
  std::vector<Configuration> starts{cfg({5, 5}), cfg({55, 55})};
  std::vector<Configuration> goals{cfg({15, 5}), cfg({45, 55})};
  PlannerParams params;
  params.n0 = 48;
  params.seed = 12;
  params.budget_seconds = 60;

  PlanResult composite = composite_prm_plan(env, robots, starts, goals, params);
  REQUIRE(composite.status == PlanStatus::Solved);
  CHECK(independent_scan_clean(composite.solution.paths, composite.roadmaps, robots,
                               composite.dt));

  // equivalent sampling density, agent by agent
  double dt = composite.dt;
  double decoupled_sum = 0;
  for (size_t i = 0; i < robots.size(); ++i) {
    Roadmap map = build_roadmap(env, robots[i], 48, params.k, mix64(params.seed, i, 0));
    EndpointConnection conn = connect_endpoints(map, env, robots[i], starts[i], goals[i],
                                                params.k);
    REQUIRE(conn.ok());
    std::optional<int> d =
        unconstrained_duration(conn.roadmap, conn.start_vertex, conn.goal_vertex, dt);
    REQUIRE(d);
    decoupled_sum += *d * dt;
  }
  CHECK(composite.solution.cost <= 1.1 * decoupled_sum);
  CHECK(composite.solution.cost >= 0.9 * decoupled_sum);
}

TEST_CASE("decoupled planner leaves non-interacting agents on their shortest paths") {
  Environment env = fixtures::empty_box(40);
  std::vector<RobotModel> robots{fixtures::disk("a", 0.5), fixtures::disk("b", 0.5)};
  std::vector<Configuration> starts{cfg({2, 5}), cfg({2, 35})};
  std::vector<Configuration> goals{cfg({12, 5}), cfg({12, 35})};
  PlannerParams params;
  params.n0 = 24;
  params.seed = 3;
  params.budget_seconds = 30;
  PlanResult result = decoupled_prm_plan(env, robots, starts, goals, {}, params);
  REQUIRE(result.status == PlanStatus::Solved);
  for (size_t i = 0; i < robots.size(); ++i) {
    std::optional<int> best =
        unconstrained_duration(result.roadmaps[i], result.start_vertices[i],
                               result.goal_vertices[i], result.dt);
    REQUIRE(best);
    CHECK(result.solution.paths[i].duration() == *best);
  }
}

TEST_CASE("decoupled priority behavior in the corridor") {
  fixtures::Corridor c = fixtures::corridor_instance(true);
  Environment env;
  env.bounds = {{-1, -1}, {7, 3}};
  PlannerParams params;
  params.horizon = 128;

  SUBCASE("priority agent keeps the corridor, the second detours") {
    DecoupledQueryResult qr = decoupled_query_on_roadmaps(
        env, c.roadmaps, c.robots,
        {c.roadmaps[0].vertices[c.starts[0]], c.roadmaps[1].vertices[c.starts[1]]},
        {c.roadmaps[0].vertices[c.goals[0]], c.roadmaps[1].vertices[c.goals[1]]}, {0, 1}, params,
        nullptr, nullptr);
    REQUIRE(qr.solved);
    CHECK(qr.solution.paths[0].duration() == 6);  // straight through
    CHECK(qr.solution.paths[1].duration() == 8);  // around the bypass
    CHECK(independent_scan_clean(qr.solution.paths, c.roadmaps, c.robots, c.dt));

    // priority respected: agent 1 never collides with agent 0's trajectory
    auto table0 = discretize_path(qr.solution.paths[0], c.roadmaps[0], c.robots[0],
                                  qr.solution.paths[0].duration(), c.dt);
    for (int t = 0; t <= qr.solution.paths[1].duration(); ++t) {
      Configuration q1 = config_at_timestep(qr.solution.paths[1], c.roadmaps[1], c.robots[1], t,
                                            c.dt);
      const Configuration& q0 =
          t < static_cast<int>(table0.size()) ? table0[t] : table0.back();
      CHECK_FALSE(in_collision_pair(c.robots[1], q1, c.robots[0], q0));
    }
  }

  SUBCASE("no bypass means no prioritized solution on these roadmaps") {
    fixtures::Corridor bare = fixtures::corridor_instance(false);
    DecoupledQueryResult qr = decoupled_query_on_roadmaps(
        env, bare.roadmaps, bare.robots,
        {bare.roadmaps[0].vertices[bare.starts[0]], bare.roadmaps[1].vertices[bare.starts[1]]},
        {bare.roadmaps[0].vertices[bare.goals[0]], bare.roadmaps[1].vertices[bare.goals[1]]},
        {0, 1}, params, nullptr, nullptr);
    CHECK_FALSE(qr.solved);
    // the oracle agrees that the joint instance is empty
    OracleResult oracle = joint_oracle(bare.roadmaps, bare.robots, bare.starts, bare.goals,
                                       CostMetric::SumOfCosts, bare.dt, 128);
    CHECK(oracle.status == OracleResult::Status::Infeasible);
  }
}

TEST_CASE("decoupled planner times out when passing is impossible") {
  // corridor too narrow for two r=0.5 disks to ever pass
  Environment env;
  env.bounds = {{0, 0}, {10, 1.8}};
  std::vector<RobotModel> robots{fixtures::disk("a", 0.5), fixtures::disk("b", 0.5)};
  std::vector<Configuration> starts{cfg({1, 0.9}), cfg({9, 0.9})};
  std::vector<Configuration> goals{cfg({9, 0.9}), cfg({1, 0.9})};
  PlannerParams params;
  params.n0 = 8;
  params.seed = 2;
  params.budget_seconds = 0.4;
  PlanResult result = decoupled_prm_plan(env, robots, starts, goals, {}, params);
  CHECK(result.status == PlanStatus::Timeout);
  CHECK(result.solution.stats.growth_rounds >= 1);
}

TEST_CASE("oracle on a single agent equals the unconstrained search") {
  Environment env = fixtures::empty_box(12);
  RobotModel r = fixtures::disk("a", 0.6);
  Rng rng(19);
  for (int trial = 0; trial < 12; ++trial) {
    Roadmap map = build_roadmap(env, r, 4 + rng.next_below(6), 3, 300 + trial);
    int s = rng.next_below(map.vertex_count());
    int g = rng.next_below(map.vertex_count());
    double dt = 0.5;
    std::optional<TimedPath> path = constrained_shortest_path(map, r, s, g, {}, dt, 256);
    OracleResult oracle =
        joint_oracle({map}, {r}, {s}, {g}, CostMetric::SumOfCosts, dt, 256);
    REQUIRE(path.has_value() == (oracle.status == OracleResult::Status::Optimal));
    if (path) {
      CHECK(oracle.cost == doctest::Approx(path->cost));
      CHECK(oracle.paths[0].duration() == path->duration());
    }
  }
}

TEST_CASE("oracle on disjoint path graphs sums the individual costs") {
  Roadmap ma = fixtures::manual_roadmap(
      "a", {cfg({0, 0}), cfg({2, 0}), cfg({4, 0})}, {{0, 1, 2.0}, {1, 2, 2.0}});
  Roadmap mb = fixtures::manual_roadmap(
      "b", {cfg({20, 0}), cfg({22, 0}), cfg({24, 0})}, {{0, 1, 2.0}, {1, 2, 2.0}});
  std::vector<RobotModel> robots{fixtures::disk("a", 0.5), fixtures::disk("b", 0.5)};
  OracleResult res = joint_oracle({ma, mb}, robots, {0, 0}, {2, 2}, CostMetric::SumOfCosts, 1.0,
                                  64);
  REQUIRE(res.status == OracleResult::Status::Optimal);
  CHECK(res.cost == doctest::Approx(8.0));  // 4 + 4 timesteps of independence

  OracleResult mk = joint_oracle({ma, mb}, robots, {0, 0}, {2, 2}, CostMetric::Makespan, 1.0, 64);
  REQUIRE(mk.status == OracleResult::Status::Optimal);
  CHECK(mk.cost == doctest::Approx(4.0));
}

TEST_CASE("oracle honors its state bound") {
  fixtures::Corridor c = fixtures::corridor_instance(true);
  OracleResult res = joint_oracle(c.roadmaps, c.robots, c.starts, c.goals,
                                  CostMetric::SumOfCosts, c.dt, 128, 3);
  CHECK(res.status == OracleResult::Status::BoundExceeded);
}

TEST_CASE("oracle cost never exceeds any planner's cost on the same roadmaps") {
  fixtures::Corridor c = fixtures::corridor_instance(true);
  Environment env;
  env.bounds = {{-1, -1}, {7, 3}};
  OracleResult oracle = joint_oracle(c.roadmaps, c.robots, c.starts, c.goals,
                                     CostMetric::SumOfCosts, c.dt, 128);
  REQUIRE(oracle.status == OracleResult::Status::Optimal);

  QueryContext ctx{c.roadmaps, c.robots, c.starts, c.goals, CostMetric::SumOfCosts, c.dt, 128, {}};
  QueryResult cbs = cbs_query(ctx, 0);
  REQUIRE(cbs.status == QueryStatus::Solved);
  CHECK(oracle.cost <= cbs.solution.cost + 1e-12);

  DecoupledQueryResult dec = decoupled_query_on_roadmaps(
      env, c.roadmaps, c.robots,
      {c.roadmaps[0].vertices[c.starts[0]], c.roadmaps[1].vertices[c.starts[1]]},
      {c.roadmaps[0].vertices[c.goals[0]], c.roadmaps[1].vertices[c.goals[1]]}, {0, 1},
      PlannerParams{.horizon = 128}, nullptr, nullptr);
  REQUIRE(dec.solved);
  CHECK(oracle.cost <= dec.solution.cost + 1e-12);
  CHECK(cbs.solution.cost <= dec.solution.cost + 1e-12);  // shared-roadmap dominance
}

TEST_CASE("composite rejects joint samples with overlapping footprints") {
  // two big disks in a small box: every joint sample collides, so sampling
  // yields nothing and the planner times out instead of producing nonsense
  Environment env = fixtures::empty_box(4);
  std::vector<RobotModel> robots{fixtures::disk("a", 1.4), fixtures::disk("b", 1.4)};
  std::vector<Configuration> starts{cfg({1.5, 2}), cfg({2.5, 2})};  // invalid anyway
  std::vector<Configuration> goals{cfg({2.5, 2}), cfg({1.5, 2})};
  PlannerParams params;
  params.n0 = 4;
  params.budget_seconds = 0.2;
  PlanResult result = composite_prm_plan(env, robots, starts, goals, params);
  CHECK(result.status == PlanStatus::Timeout);
}

TEST_CASE("composite solves the corridor and passes the independent scan") {
  Environment env;
  env.bounds = {{0, 0}, {10, 6}};
  std::vector<RobotModel> robots{fixtures::disk("a", 0.5), fixtures::disk("b", 0.5)};
  std::vector<Configuration> starts{cfg({1, 3}), cfg({9, 3})};
  std::vector<Configuration> goals{cfg({9, 3}), cfg({1, 3})};
  PlannerParams params;
  params.n0 = 40;
  params.seed = 5;
  params.budget_seconds = 60;
  PlanResult result = composite_prm_plan(env, robots, starts, goals, params);
  REQUIRE(result.status == PlanStatus::Solved);
  CHECK(independent_scan_clean(result.solution.paths, result.roadmaps, robots, result.dt));
  // decomposed paths share the synchronized timestep grid
  for (const TimedPath& p : result.solution.paths) {
    CHECK(p.arrival.front() == 0);
    for (size_t k = 0; k + 1 < p.arrival.size(); ++k) CHECK(p.arrival[k] < p.arrival[k + 1]);
  }
}
