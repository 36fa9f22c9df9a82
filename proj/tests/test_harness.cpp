#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "scenforge/harness.hpp"

using namespace scenforge;
namespace fs = std::filesystem;

namespace {

const std::string kGridPath = std::string(SCENFORGE_MAPS_DIR) + "/grid_3x3.json";

ExperimentConfig small_config(const std::string& out) {
  ExperimentConfig cfg;
  cfg.map_path = kGridPath;
  cfg.output_dir = out;
  cfg.population_size = 6;
  cfg.min_obstacles = 1;
  cfg.max_obstacles = 8;
  cfg.generations = 2;
  cfg.seeds = {7};
  cfg.workers = 4;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("sampled scenarios honor the configured ranges") {
  const LaneMap map = LaneMap::load(kGridPath);
  ExperimentConfig cfg = small_config("unused");
  cfg.min_obstacles = 2;
  cfg.max_obstacles = 5;
  Rng rng(17);
  for (int i = 0; i < 25; ++i) {
    const ScenarioGenome s = sample_scenario(cfg, map, rng, "probe");
    CHECK(s.obstacles.size() >= 2);
    CHECK(s.obstacles.size() <= 5);
    const auto route = map.shortest_route(s.ego_start, s.ego_end);
    REQUIRE(route);
    CHECK(route->total_length >= cfg.min_ego_route_length);
    std::set<std::int64_t> ids;
    for (const auto& o : s.obstacles) ids.insert(o.id);
    CHECK(ids.size() == s.obstacles.size());
    for (const auto& o : s.obstacles)
      CHECK(validate(o, cfg.constraints, map).empty());
  }
}

TEST_CASE("identical config and seed reproduce identical artifacts") {
  const auto dir_a = fresh_dir("scenforge_det_a");
  const auto dir_b = fresh_dir("scenforge_det_b");
  const ExperimentConfig cfg_a = small_config(dir_a.string());
  const ExperimentConfig cfg_b = small_config(dir_b.string());

  const RunReport run_a = run_experiment(cfg_a, Representation::kFull, 7);
  const RunReport run_b = run_experiment(cfg_b, Representation::kFull, 7);

  CHECK(run_a.total_evaluations == run_b.total_evaluations);
  CHECK(run_a.violations.size() == run_b.violations.size());
  CHECK(slurp(run_a.run_dir + "/violations.json") ==
        slurp(run_b.run_dir + "/violations.json"));
  CHECK(slurp(run_a.run_dir + "/dedup.json") ==
        slurp(run_b.run_dir + "/dedup.json"));

  // every record file byte-identical
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(run_a.run_dir + "/records"))
    names.insert(entry.path().filename().string());
  CHECK(!names.empty());
  for (const auto& name : names) {
    CHECK(slurp(run_a.run_dir + "/records/" + name) ==
          slurp(run_b.run_dir + "/records/" + name));
  }

  emit_report(cfg_a, {run_a});
  emit_report(cfg_b, {run_b});
  CHECK(slurp(dir_a.string() + "/summary.csv") ==
        slurp(dir_b.string() + "/summary.csv"));
}

TEST_CASE("all representations spend the same evaluation budget") {
  const auto dir = fresh_dir("scenforge_budget");
  const ExperimentConfig cfg = small_config(dir.string());
  const RunReport full = run_experiment(cfg, Representation::kFull, 3);
  const RunReport partial = run_experiment(cfg, Representation::kPartial, 3);
  const RunReport random = run_experiment(cfg, Representation::kRandom, 3);
  CHECK(full.total_evaluations ==
        static_cast<std::size_t>(cfg.population_size * (cfg.generations + 1)));
  CHECK(partial.total_evaluations == full.total_evaluations);
  CHECK(random.total_evaluations == full.total_evaluations);
}

TEST_CASE("a zero-generation budget reports only the initial population") {
  const auto dir = fresh_dir("scenforge_zero");
  ExperimentConfig cfg = small_config(dir.string());
  cfg.generations = 0;
  const RunReport run = run_experiment(cfg, Representation::kFull, 7);
  CHECK(run.generations.size() == 1);
  CHECK(run.total_evaluations ==
        static_cast<std::size_t>(cfg.population_size));
}

TEST_CASE("cumulative violation counts never decrease") {
  const auto dir = fresh_dir("scenforge_cumulative");
  ExperimentConfig cfg = small_config(dir.string());
  cfg.generations = 4;
  const RunReport run = run_experiment(cfg, Representation::kFull, 11);
  REQUIRE(run.generations.size() == 5);
  for (std::size_t g = 1; g < run.generations.size(); ++g) {
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(run.generations[g].cumulative_violations[k] >=
            run.generations[g - 1].cumulative_violations[k]);
    }
  }
  // logged violations reconcile with the dedup totals
  CHECK(run.dedup.total.all == run.violations.size());
}

TEST_CASE("every unique violation's scenario replays to the same kind") {
  const auto dir = fresh_dir("scenforge_replay");
  ExperimentConfig cfg = small_config(dir.string());
  cfg.generations = 3;
  const RunReport run = run_experiment(cfg, Representation::kFull, 11);
  REQUIRE(!run.dedup.representatives.empty());
  for (std::size_t idx : run.dedup.representatives) {
    const LoggedViolation& lv = run.violations[idx];
    const std::string scenario_file =
        run.run_dir + "/scenarios/" + lv.scenario_id + ".json";
    REQUIRE(fs::exists(scenario_file));
    const ReplayResult replay = replay_scenario(
        scenario_file, cfg.map_path, cfg.planner, cfg.thresholds,
        cfg.lane_change_penalty);
    bool found = false;
    for (const auto& v : replay.evaluation.violations)
      found |= v.kind == lv.violation.kind;
    CHECK(found);
  }
}

TEST_CASE("re-grading a persisted record reproduces its violations") {
  const auto dir = fresh_dir("scenforge_regrade");
  const ExperimentConfig cfg = small_config(dir.string());
  const RunReport run = run_experiment(cfg, Representation::kFull, 7);
  REQUIRE(!run.violations.empty());
  LaneMap map = LaneMap::load(cfg.map_path);

  // group logged violations per scenario, then re-grade each record
  std::map<std::string, std::size_t> counts;
  for (const auto& lv : run.violations) counts[lv.scenario_id] += 1;
  for (const auto& [scenario_id, count] : counts) {
    const Trace trace =
        read_record(run.run_dir + "/records/" + scenario_id + ".jsonl");
    const Evaluation eval = evaluate(trace, map, cfg.thresholds);
    CHECK(eval.violations.size() == count);
  }
}

TEST_CASE("emit_report marks a single run as insufficient for stats") {
  const auto dir = fresh_dir("scenforge_single");
  const ExperimentConfig cfg = small_config(dir.string());
  const RunReport run = run_experiment(cfg, Representation::kFull, 7);
  emit_report(cfg, {run});
  const std::string stats = slurp(dir.string() + "/stats.json");
  CHECK(stats.find("\"insufficient_samples\": true") != std::string::npos);
  CHECK(stats.find("\"pairs\": []") != std::string::npos);

  const std::string summary = slurp(dir.string() + "/summary.csv");
  // header + (5 kinds + total) for one representation
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 7);
}

TEST_CASE("emit_report computes pairwise stats across representations") {
  const auto dir = fresh_dir("scenforge_pairs");
  ExperimentConfig cfg = small_config(dir.string());
  cfg.representations = {Representation::kFull, Representation::kRandom};
  cfg.seeds = {7, 11};
  std::vector<RunReport> reports;
  for (Representation rep : cfg.representations)
    for (std::uint64_t seed : cfg.seeds)
      reports.push_back(run_experiment(cfg, rep, seed));
  emit_report(cfg, reports);

  const std::string stats = slurp(dir.string() + "/stats.json");
  CHECK(stats.find("\"insufficient_samples\": false") != std::string::npos);
  CHECK(stats.find("\"a\": \"full\"") != std::string::npos);
  CHECK(stats.find("\"b\": \"random\"") != std::string::npos);
  CHECK(stats.find("\"p_value\"") != std::string::npos);
  CHECK(stats.find("\"a12\"") != std::string::npos);

  const std::string summary = slurp(dir.string() + "/summary.csv");
  // header + (5 kinds + total) x 2 representations
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 13);
  CHECK(summary.find("collision,full,") != std::string::npos);
  CHECK(summary.find("total,random,") != std::string::npos);
}

TEST_CASE("violations files round-trip and re-dedup consistently") {
  const auto dir = fresh_dir("scenforge_dedup_file");
  const ExperimentConfig cfg = small_config(dir.string());
  const RunReport run = run_experiment(cfg, Representation::kFull, 7);
  const auto logged = read_violations_file(run.run_dir + "/violations.json");
  REQUIRE(logged.size() == run.violations.size());
  for (std::size_t i = 0; i < logged.size(); ++i) {
    CHECK(logged[i].violation_id == run.violations[i].violation_id);
    CHECK(logged[i].scenario_id == run.violations[i].scenario_id);
    CHECK(logged[i].violation.kind == run.violations[i].violation.kind);
    CHECK(logged[i].violation.t_first ==
          doctest::Approx(run.violations[i].violation.t_first));
  }
  const DedupReport again = dedup_violations_file(run.run_dir);
  CHECK(again.total.all == run.dedup.total.all);
  CHECK(again.total.unique == run.dedup.total.unique);
}

TEST_CASE("wall-clock budget mode terminates and produces a report") {
  const auto dir = fresh_dir("scenforge_wall");
  ExperimentConfig cfg = small_config(dir.string());
  cfg.wall_clock_minutes = 0.002;  // ~0.12 s
  cfg.population_size = 4;
  cfg.max_obstacles = 4;
  const RunReport run = run_experiment(cfg, Representation::kRandom, 5);
  CHECK(run.generations.size() >= 1);
  CHECK(fs::exists(run.run_dir + "/run_report.json"));
}
