// forge: scenario search, replay, dedup, and comparison statistics.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scenforge/harness.hpp"
#include "scenforge/simulator.hpp"
#include "scenforge/stats.hpp"

namespace {

using namespace scenforge;

int cmd_run(const std::string& config_path, const std::string& rep_override,
            long long seed_override, long long budget_override,
            double wall_clock_override, const std::string& map_override,
            const std::string& out_override) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (!rep_override.empty())
    cfg.representations = {representation_from_string(rep_override)};
  if (seed_override >= 0)
    cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  if (budget_override >= 0) {
    cfg.generations = static_cast<int>(budget_override);
    cfg.wall_clock_minutes = 0.0;
  }
  if (wall_clock_override > 0.0) cfg.wall_clock_minutes = wall_clock_override;
  if (!map_override.empty()) cfg.map_path = map_override;
  if (!out_override.empty()) cfg.output_dir = out_override;
  cfg.validate();

  std::vector<RunReport> reports;
  for (Representation rep : cfg.representations) {
    for (std::uint64_t seed : cfg.seeds) {
      std::printf("run: representation=%s seed=%llu map=%s\n", to_string(rep),
                  static_cast<unsigned long long>(seed), cfg.map_path.c_str());
      std::fflush(stdout);
      RunReport report = run_experiment(cfg, rep, seed);
      std::printf(
          "  evaluations=%zu violations=%zu unique=%zu eliminated=%.2f%% "
          "(%.1fs)\n",
          report.total_evaluations, report.dedup.total.all,
          report.dedup.total.unique, report.dedup.total.eliminated_percent,
          report.wall_seconds);
      std::fflush(stdout);
      reports.push_back(std::move(report));
    }
  }
  emit_report(cfg, reports);
  std::printf("report: %s/summary.csv, %s/stats.json\n",
              cfg.output_dir.c_str(), cfg.output_dir.c_str());
  return 0;
}

int cmd_replay(const std::string& scenario_path, const std::string& map_path,
               const std::string& config_path, const std::string& record_out) {
  PlannerConfig planner;
  Thresholds thresholds;
  double penalty = 5.0;
  if (!config_path.empty()) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    planner = cfg.planner;
    thresholds = cfg.thresholds;
    penalty = cfg.lane_change_penalty;
  }
  const ReplayResult result =
      replay_scenario(scenario_path, map_path, planner, thresholds, penalty);
  if (!record_out.empty()) write_record(result.trace, record_out);

  const auto& o = result.evaluation.objectives;
  std::printf("objectives: collision=%.3f speed=%.3f unsafeChange=%.3f "
              "fastAccl=%.3f hardBrake=%.3f\n",
              o.collision, o.speed, o.unsafe_change, o.fast_accel,
              o.hard_brake);
  if (result.evaluation.violations.empty()) {
    std::printf("violations: none\n");
    return 0;
  }
  std::printf("violations: %zu\n", result.evaluation.violations.size());
  for (const auto& v : result.evaluation.violations) {
    std::printf("  %-12s t=%.1fs duration=%.1fs value=%.3f", to_string(v.kind),
                v.t_first, v.duration, v.value);
    if (v.kind == ViolationKind::kCollision)
      std::printf(" side=%s obstacle=%lld (%s)", to_string(v.collision_side),
                  static_cast<long long>(v.obstacle_id),
                  to_string(v.obstacle_kind));
    std::printf("\n");
  }
  return 0;
}

int cmd_dedup(const std::string& violations_path) {
  const DedupReport report = dedup_violations_file(violations_path);
  std::printf("%-14s %8s %8s %8s\n", "kind", "all", "unique", "elim%");
  for (const auto& [kind, counts] : report.per_kind) {
    std::printf("%-14s %8zu %8zu %7.2f%%\n", kind.c_str(), counts.all,
                counts.unique, counts.eliminated_percent);
  }
  std::printf("%-14s %8zu %8zu %7.2f%%\n", "total", report.total.all,
              report.total.unique, report.total.eliminated_percent);
  return 0;
}

int cmd_stats(const std::string& dir_a, const std::string& dir_b) {
  auto unique_counts = [](const std::string& dir) {
    std::map<std::string, std::vector<double>> out;
    namespace fs = std::filesystem;
    std::vector<std::string> run_dirs;
    if (fs::exists(dir + "/violations.json")) {
      run_dirs.push_back(dir);
    } else {
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() &&
            fs::exists(entry.path() / "violations.json"))
          run_dirs.push_back(entry.path().string());
      }
      std::sort(run_dirs.begin(), run_dirs.end());
    }
    if (run_dirs.empty())
      throw std::runtime_error("no run directories with violations.json in '" +
                               dir + "'");
    for (const auto& rd : run_dirs) {
      const DedupReport report = dedup_violations_file(rd);
      for (const auto& [kind, counts] : report.per_kind)
        out[kind].push_back(static_cast<double>(counts.unique));
      out["total"].push_back(static_cast<double>(report.total.unique));
    }
    return out;
  };
  const auto a = unique_counts(dir_a);
  const auto b = unique_counts(dir_b);
  std::printf("%-14s %12s %8s\n", "kind", "p_value", "a12");
  for (const auto& [kind, xs] : a) {
    const auto it = b.find(kind);
    if (it == b.end()) continue;
    std::printf("%-14s %12.6f %8.4f\n", kind.c_str(),
                mann_whitney_u(xs, it->second),
                vargha_delaney_a12(xs, it->second));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenario search against the built-in planner"};
  app.require_subcommand(1);

  std::string config_path, rep, map_path, out_dir;
  long long seed = -1, budget = -1;
  double wall_clock = 0.0;
  auto* run = app.add_subcommand("run", "run an experiment from a config");
  run->add_option("--config", config_path, "experiment config file")
      ->required();
  run->add_option("--seed", seed, "override: single seed");
  run->add_option("--budget", budget, "override: generation budget");
  run->add_option("--wall-clock", wall_clock, "override: budget in minutes");
  run->add_option("--rep", rep, "override: full|partial|random");
  run->add_option("--map", map_path, "override: map file");
  run->add_option("--out", out_dir, "override: output directory");

  std::string scenario_path, replay_map, replay_config, record_out;
  auto* replay = app.add_subcommand("replay", "re-simulate and re-grade a scenario");
  replay->add_option("--scenario", scenario_path, "scenario JSON file")
      ->required();
  replay->add_option("--map", replay_map, "map file")->required();
  replay->add_option("--config", replay_config,
                     "optional config for planner/threshold settings");
  replay->add_option("--record", record_out, "write the replayed record here");

  std::string violations_path;
  auto* dedup_cmd = app.add_subcommand("dedup", "recompute duplicate elimination");
  dedup_cmd
      ->add_option("--violations", violations_path,
                   "violations.json file or run directory")
      ->required();

  std::string dir_a, dir_b;
  auto* stats_cmd =
      app.add_subcommand("stats", "compare two result sets (Mann-Whitney, A12)");
  stats_cmd->add_option("--a", dir_a, "first run/output directory")->required();
  stats_cmd->add_option("--b", dir_b, "second run/output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, rep, seed, budget, wall_clock, map_path,
                     out_dir);
    if (replay->parsed())
      return cmd_replay(scenario_path, replay_map, replay_config, record_out);
    if (dedup_cmd->parsed()) return cmd_dedup(violations_path);
    if (stats_cmd->parsed()) return cmd_stats(dir_a, dir_b);
  } catch (const scenforge::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const scenforge::MapError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
