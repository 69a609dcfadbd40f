#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "cbsmp/bench.hpp"
#include "cbsmp/svg.hpp"
#include "helpers.hpp"

using namespace cbsmp;
using fixtures::cfg;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Minimal XML well-formedness scan: balanced, properly nested tags and quoted
// attribute values.
bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  size_t i = 0;
  auto skip_until = [&](const std::string& end) {
    size_t p = text.find(end, i);
    if (p == std::string::npos) return false;
    i = p + end.size();
    return true;
  };
  while (i < text.size()) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    if (text.compare(i, 2, "<?") == 0) {
      if (!skip_until("?>")) return false;
      continue;
    }
    if (text.compare(i, 4, "<!--") == 0) {
      if (!skip_until("-->")) return false;
      continue;
    }
    size_t close = text.find('>', i);
    if (close == std::string::npos) return false;
    std::string tag = text.substr(i + 1, close - i - 1);
    i = close + 1;
    // reject unquoted attribute values
    int quotes = 0;
    for (char c : tag)
      if (c == '"') ++quotes;
    if (quotes % 2 != 0) return false;
    if (tag.empty()) return false;
    if (tag[0] == '/') {
      std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else if (tag.back() == '/') {
      continue;  // self-closing
    } else {
      std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
      stack.push_back(name);
    }
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("scenario save/load round-trips") {
  Scenario s = gen_crossing(4, 0.5, 16.0, 7);
  std::string text = save_scenario(s);
  Scenario loaded = load_scenario(text);
  CHECK(save_scenario(loaded) == text);
  CHECK(loaded.name == s.name);
  CHECK(loaded.robots.size() == 4);
  CHECK(loaded.starts == s.starts);
  CHECK(loaded.goals == s.goals);
  CHECK(loaded.params.seed == 7);
  CHECK_FALSE(loaded.unsolvable_start_overlap);
}

TEST_CASE("parse errors carry line numbers") {
  std::string bad =
      "scenario t\n"
      "bounds 0 0 10 10\n"
      "robot a disk oops 1\n";
  try {
    load_scenario(bad);
    FAIL("expected a parse error");
  } catch (const ScenarioParseError& e) {
    CHECK(e.line_number == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  std::string unknown =
      "scenario t\n"
      "bounds 0 0 10 10\n"
      "wobble 3\n";
  CHECK_THROWS_AS(load_scenario(unknown), ScenarioParseError);
}

TEST_CASE("validation names the offending robot") {
  std::string text =
      "scenario t\n"
      "bounds 0 0 20 20\n"
      "obstacle 4 8 8 12 8 12 12 8 12\n"
      "robot r7 disk 0.5 1\n"
      "start r7 2 2\n"
      "goal r7 10 10\n";  // inside the obstacle
  try {
    load_scenario(text);
    FAIL("expected a validation error");
  } catch (const ScenarioValidationError& e) {
    CHECK(std::string(e.what()).find("r7") != std::string::npos);
    CHECK(std::string(e.what()).find("goal") != std::string::npos);
  }
}

TEST_CASE("colliding starts are flagged, not rejected") {
  std::string text =
      "scenario t\n"
      "bounds 0 0 20 20\n"
      "robot a disk 1 1\n"
      "robot b disk 1 1\n"
      "start a 5 5\n"
      "goal a 15 5\n"
      "start b 6 5\n"
      "goal b 5 15\n";
  Scenario s = load_scenario(text);
  CHECK(s.unsolvable_start_overlap);
}

TEST_CASE("golden crossing scenario parses to four disk robots") {
  Scenario s = load_scenario_file(std::string(CBSMP_TEST_DATA_DIR) + "/crossing4.scn");
  CHECK(s.robots.size() == 4);
  for (const RobotModel& r : s.robots) CHECK(r.kind == RobotKind::Disk);
  CHECK(s.params.max_ct_nodes == 64);
  CHECK(s.params.budget_seconds == doctest::Approx(1000.0));
}

TEST_CASE("gen_crossing layout and scaling") {
  CHECK_THROWS_AS(gen_crossing(3, 0.5, 16, 1), std::invalid_argument);

  Scenario two = gen_crossing(2, 0.5, 16, 1);
  REQUIRE(two.robots.size() == 2);
  // one horizontal crosser, one vertical crosser
  CHECK(two.starts[0].values[1] == two.goals[0].values[1]);
  CHECK(two.starts[1].values[0] == two.goals[1].values[0]);

  Scenario four = gen_crossing(4, 0.5, 16, 1);
  Scenario eight = gen_crossing(8, 0.5, 16, 1);
  double a4 = four.env.bounds.area(), a8 = eight.env.bounds.area();
  CHECK(a8 / a4 == doctest::Approx(2.0).epsilon(1e-12));

  // free area per robot is density-invariant across team sizes
  for (int n : {2, 4, 8, 16}) {
    Scenario s = gen_crossing(n, 0.5, 16, 1);
    CHECK(std::abs(s.env.bounds.area() / n - 16.0) <= 1e-9);
    for (size_t i = 0; i < s.robots.size(); ++i)
      for (size_t j = i + 1; j < s.robots.size(); ++j)
        CHECK_FALSE(in_collision_pair(s.robots[i], s.starts[i], s.robots[j], s.starts[j]));
  }
}

TEST_CASE("gen_arms produces contested but valid teams") {
  Scenario s = gen_arms(2, 2, 5);
  REQUIRE(s.robots.size() == 2);
  CHECK_FALSE(s.unsolvable_start_overlap);
  for (size_t i = 0; i < s.robots.size(); ++i) {
    CHECK(is_valid_config(s.env, s.robots[i], s.starts[i]));
    CHECK(is_valid_config(s.env, s.robots[i], s.goals[i]));
  }

  // both arms' start footprints overlap the central region's bounding circle
  double ring = s.robots[0].base.norm();
  double central = 0.75 * ring;
  for (size_t i = 0; i < s.robots.size(); ++i) {
    std::vector<Vec2> pts = chain_points(s.robots[i], s.starts[i]);
    bool overlaps = false;
    for (size_t k = 0; k + 1 < pts.size(); ++k)
      if (test_oracle::point_segment_distance({0, 0}, pts[k], pts[k + 1]) <=
          central + s.robots[i].link_width / 2)
        overlaps = true;
    CHECK(overlaps);
  }

  SUBCASE("same seed gives identical files") {
    CHECK(save_scenario(gen_arms(2, 2, 5)) == save_scenario(s));
  }
  SUBCASE("more arms still generate") {
    Scenario four = gen_arms(4, 2, 9);
    CHECK(four.robots.size() == 4);
    CHECK_FALSE(four.unsolvable_start_overlap);
  }
}

TEST_CASE("zero budget benchmarks time out across the cross product") {
  Scenario sc = gen_crossing(4, 0.5, 16, 1);
  BenchOptions options;
  options.seeds = 5;
  options.budget_seconds = 0;
  std::vector<RunRecord> records = run_benchmark({sc}, {"cbs", "decoupled"}, options);
  CHECK(records.size() == 10);  // 1 scenario x 2 planners x 5 seeds
  for (const RunRecord& r : records) CHECK(r.outcome == "timeout");
  std::string csv = records_to_csv(records);
  CHECK(csv.find(kCsvHeader) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);  // header + 10 rows
  // cost column is empty on timeouts
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) CHECK(line.find(",timeout,") != std::string::npos);
}

TEST_CASE("benchmark runs are deterministic apart from wall time") {
  Scenario sc = gen_crossing(2, 0.5, 16, 1);
  RunRecord a = run_single(sc, "cbs", 3, 60);
  RunRecord b = run_single(sc, "cbs", 3, 60);
  CHECK(a.outcome == "solved");
  CHECK(a.outcome == b.outcome);
  CHECK(a.cost == b.cost);
  CHECK(a.roadmap_vertices == b.roadmap_vertices);
  CHECK(a.stats.ct_generated == b.stats.ct_generated);
  CHECK(a.stats.replans == b.stats.replans);
}

TEST_CASE("budget enforcement stays within five percent") {
  // unsolvable narrow corridor keeps the planner grinding until the deadline
  Environment env;
  env.bounds = {{0, 0}, {10, 1.8}};
  Scenario sc;
  sc.name = "tight";
  sc.env = env;
  sc.robots = {fixtures::disk("a", 0.5), fixtures::disk("b", 0.5)};
  sc.starts = {cfg({1, 0.9}), cfg({9, 0.9})};
  sc.goals = {cfg({9, 0.9}), cfg({1, 0.9})};
  sc.params.n0 = 16;
  for (const char* planner : {"cbs", "decoupled", "composite"}) {
    RunRecord rec = run_single(sc, planner, 1, 0.5);
    CHECK(rec.outcome == "timeout");
    CHECK(rec.planning_seconds <= 0.5 * 1.05);
  }
}

TEST_CASE("shared-roadmap rounds hash identically and respect dominance") {
  Scenario sc = gen_crossing(4, 0.5, 16, 1);
  sc.params.n0 = 24;
  std::vector<SharedRoundRecord> rounds = shared_roadmap_rounds(sc, 3, 2);
  REQUIRE(rounds.size() == 3);
  int both = 0;
  for (const SharedRoundRecord& r : rounds) {
    CHECK(r.cbs_input_hashes == r.dec_input_hashes);
    if (r.cbs_solved && r.dec_solved) {
      ++both;
      CHECK(r.cbs_cost <= r.dec_cost + 1e-12);
    }
    if (r.dec_solved) CHECK(r.cbs_solved);  // success dominance
  }
  CHECK(both >= 1);
}

TEST_CASE("svg rendering") {
  Scenario sc = gen_crossing(2, 0.5, 16, 1);
  sc.env.obstacles.push_back(fixtures::square(4, 4, 0.5));
  sc.validate();

  SUBCASE("environment-only drawing is well-formed") {
    std::string svg = render_svg(sc, nullptr);
    CHECK(xml_well_formed(svg));
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polygon") != std::string::npos);  // the obstacle
    CHECK(svg.find("polyline fill=\"none\" stroke=") == std::string::npos);
  }

  SUBCASE("solutions add one colored polyline per agent") {
    PlannerParams params = sc.params;
    params.budget_seconds = 60;
    params.seed = 1;
    PlanResult result = plan(sc.env, sc.robots, sc.starts, sc.goals, params);
    REQUIRE(result.status == PlanStatus::Solved);
    SolutionFile file = load_solution(
        save_solution(result.solution, result.roadmaps, sc.robots, result.dt, result.metric));
    std::string svg = render_svg(sc, &file);
    CHECK(xml_well_formed(svg));
    size_t count = 0;
    std::set<std::string> colors;
    size_t pos = 0;
    while ((pos = svg.find("<polyline fill=\"none\" stroke=\"", pos)) != std::string::npos) {
      pos += 30;
      colors.insert(svg.substr(pos, 7));
      ++count;
    }
    CHECK(count == 2);
    CHECK(colors.size() == 2);
  }
}

TEST_CASE("summaries aggregate by scenario and planner") {
  Scenario sc = gen_crossing(2, 0.5, 16, 1);
  BenchOptions options;
  options.seeds = 2;
  options.budget_seconds = 30;
  options.jobs = 2;
  std::vector<RunRecord> records = run_benchmark({sc}, {"cbs"}, options);
  REQUIRE(records.size() == 2);
  for (const RunRecord& r : records) CHECK(r.outcome == "solved");
  std::string table = summarize(records);
  CHECK(table.find("crossing2") != std::string::npos);
  CHECK(table.find("100%") != std::string::npos);
}
