#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scenforge/config.hpp"
#include "scenforge/dedup.hpp"
#include "scenforge/evolution.hpp"

namespace scenforge {

struct GenerationStats {
  int generation = 0;
  std::size_t evaluations = 0;
  std::array<std::size_t, 5> new_violations{};         // per kind
  std::array<std::size_t, 5> cumulative_violations{};  // per kind
  ObjectiveVector best;  // per-objective extreme in the violating direction
  double breed_seconds = 0.0;
  double sim_seconds = 0.0;
  double oracle_seconds = 0.0;
};

struct LoggedViolation {
  int violation_id = 0;
  std::string scenario_id;
  Violation violation;
};

struct RunReport {
  Representation representation = Representation::kFull;
  std::uint64_t seed = 0;
  std::string run_dir;
  std::size_t total_evaluations = 0;
  std::vector<GenerationStats> generations;
  std::vector<LoggedViolation> violations;
  DedupReport dedup;
  double sim_seconds = 0.0;
  double oracle_seconds = 0.0;
  double misc_seconds = 0.0;  // breeding, sampling, validity checks
  double wall_seconds = 0.0;
};

/// Samples a valid scenario: routable ego endpoints at least
/// min_ego_route_length apart and a uniform obstacle count in range.
ScenarioGenome sample_scenario(const ExperimentConfig& cfg, const LaneMap& map,
                               Rng& rng, const std::string& scenario_id);

/// Simulates and grades a batch, fanning out over cfg.workers threads.
/// Results are ordered by input index regardless of scheduling.
std::vector<EvaluatedScenario> evaluate_population(
    const std::vector<ScenarioGenome>& scenarios, const LaneMap& map,
    const ExperimentConfig& cfg, double* sim_seconds = nullptr,
    double* oracle_seconds = nullptr);

/// Runs one representation for one seed: the generational loop, violation
/// logging with persisted records and scenario files, and final dedup.
/// Deterministic given (cfg, rep, seed) under the generation budget.
RunReport run_experiment(const ExperimentConfig& cfg, Representation rep,
                         std::uint64_t seed);

/// Writes summary.csv (one row per kind and representation) and
/// stats.json (pairwise Mann-Whitney p and A12 over per-seed unique
/// counts) into cfg.output_dir.
void emit_report(const ExperimentConfig& cfg,
                 const std::vector<RunReport>& reports);

struct ReplayResult {
  Trace trace;
  Evaluation evaluation;
};

/// Re-simulates a scenario file and re-grades it.
ReplayResult replay_scenario(const std::string& scenario_path,
                             const std::string& map_path,
                             const PlannerConfig& planner,
                             const Thresholds& thresholds,
                             double lane_change_penalty = 5.0);

/// Reads back a violations.json written by run_experiment.
std::vector<LoggedViolation> read_violations_file(const std::string& path);

/// Recomputes dedup over a violations.json file or a run directory.
DedupReport dedup_violations_file(const std::string& path);

}  // namespace scenforge
