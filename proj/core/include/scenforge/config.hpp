#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenforge/oracles.hpp"
#include "scenforge/simulator.hpp"
#include "scenforge/validity.hpp"

namespace scenforge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key-value view of a TOML-style config file (docs/config.md).
/// Supports [section] and [a.b] headers, `key = value` lines, strings,
/// numbers, booleans, scalar arrays, and # comments. Keys are addressed
/// as "section.key".
class ConfigTable {
 public:
  static ConfigTable parse_file(const std::string& path);
  static ConfigTable parse_text(const std::string& text);

  bool has(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_double_array(const std::string& key) const;
  std::vector<std::string> get_string_array(const std::string& key) const;

 private:
  struct Value {
    enum class Type { kNumber, kBool, kString, kArray } type;
    double number = 0.0;
    bool boolean = false;
    std::string text;
    std::vector<Value> items;
  };
  const Value* find(const std::string& key) const;
  std::map<std::string, Value> values_;
};

enum class Representation { kFull, kPartial, kRandom };
const char* to_string(Representation rep);
Representation representation_from_string(const std::string& s);

/// One experiment: maps, budget, probabilities, and component configs.
struct ExperimentConfig {
  std::vector<Representation> representations = {Representation::kFull};
  std::string map_path;
  std::string output_dir = "out";
  int population_size = 50;
  int min_obstacles = 1;
  int max_obstacles = 70;
  double duration = 30.0;          // seconds per scenario
  int generations = 10;            // evaluation-budget mode
  double wall_clock_minutes = 0.0; // > 0 selects wall-clock budget
  std::vector<std::uint64_t> seeds = {1};
  double p_crossover = 0.8;
  double p_gene_mutation = 0.2;
  double p_add = 0.1;
  double p_remove = 0.1;
  int workers = 0;  // 0 = hardware concurrency
  double min_ego_route_length = 60.0;
  double lane_change_penalty = 5.0;
  Thresholds thresholds;
  PlannerConfig planner;
  ConstraintTable constraints;

  void validate() const;  // throws ConfigError
};

ExperimentConfig experiment_config_from_table(const ConfigTable& table);
ExperimentConfig load_experiment_config(const std::string& path);

/// Constraint table from a [constraints.*] section set; missing entries
/// keep the embedded defaults. Speeds are configured in km/h.
ConstraintTable constraints_from_table(const ConfigTable& table);

}  // namespace scenforge
