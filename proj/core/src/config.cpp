#include "scenforge/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace scenforge {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Strips a # comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

}  // namespace

ConfigTable ConfigTable::parse_text(const std::string& text) {
  ConfigTable table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;

  auto parse_scalar = [&](const std::string& raw) -> Value {
    Value v;
    const std::string s = trim(raw);
    if (s.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty value");
    if (s.front() == '"') {
      if (s.size() < 2 || s.back() != '"')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unterminated string");
      v.type = Value::Type::kString;
      v.text = s.substr(1, s.size() - 2);
      return v;
    }
    if (s == "true" || s == "false") {
      v.type = Value::Type::kBool;
      v.boolean = s == "true";
      return v;
    }
    try {
      std::size_t used = 0;
      v.number = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      v.type = Value::Type::kNumber;
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": cannot parse value '" + s + "'");
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": empty section name");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string raw = trim(body.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");

    Value value;
    if (!raw.empty() && raw.front() == '[') {
      if (raw.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unterminated array");
      value.type = Value::Type::kArray;
      const std::string inner = raw.substr(1, raw.size() - 2);
      std::string item;
      bool in_string = false;
      for (char c : inner) {
        if (c == '"') in_string = !in_string;
        if (c == ',' && !in_string) {
          if (!trim(item).empty()) value.items.push_back(parse_scalar(item));
          item.clear();
        } else {
          item += c;
        }
      }
      if (!trim(item).empty()) value.items.push_back(parse_scalar(item));
    } else {
      value = parse_scalar(raw);
    }
    const std::string full_key = section.empty() ? key : section + "." + key;
    table.values_[full_key] = std::move(value);
  }
  return table;
}

ConfigTable ConfigTable::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

const ConfigTable::Value* ConfigTable::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

bool ConfigTable::has(const std::string& key) const { return find(key) != nullptr; }

double ConfigTable::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->type != Value::Type::kNumber)
    throw ConfigError("config key '" + key + "' is not a number");
  return v->number;
}

std::int64_t ConfigTable::get_int(const std::string& key,
                                  std::int64_t fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->type != Value::Type::kNumber)
    throw ConfigError("config key '" + key + "' is not a number");
  return static_cast<std::int64_t>(v->number);
}

bool ConfigTable::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->type != Value::Type::kBool)
    throw ConfigError("config key '" + key + "' is not a boolean");
  return v->boolean;
}

std::string ConfigTable::get_string(const std::string& key,
                                    const std::string& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->type != Value::Type::kString)
    throw ConfigError("config key '" + key + "' is not a string");
  return v->text;
}

std::vector<double> ConfigTable::get_double_array(const std::string& key) const {
  const Value* v = find(key);
  std::vector<double> out;
  if (!v) return out;
  if (v->type == Value::Type::kNumber) {
    out.push_back(v->number);
    return out;
  }
  if (v->type != Value::Type::kArray)
    throw ConfigError("config key '" + key + "' is not an array");
  for (const auto& item : v->items) {
    if (item.type != Value::Type::kNumber)
      throw ConfigError("config key '" + key + "' has a non-numeric element");
    out.push_back(item.number);
  }
  return out;
}

std::vector<std::string> ConfigTable::get_string_array(
    const std::string& key) const {
  const Value* v = find(key);
  std::vector<std::string> out;
  if (!v) return out;
  if (v->type == Value::Type::kString) {
    out.push_back(v->text);
    return out;
  }
  if (v->type != Value::Type::kArray)
    throw ConfigError("config key '" + key + "' is not an array");
  for (const auto& item : v->items) {
    if (item.type != Value::Type::kString)
      throw ConfigError("config key '" + key + "' has a non-string element");
    out.push_back(item.text);
  }
  return out;
}

const char* to_string(Representation rep) {
  switch (rep) {
    case Representation::kFull: return "full";
    case Representation::kPartial: return "partial";
    case Representation::kRandom: return "random";
  }
  return "full";
}

Representation representation_from_string(const std::string& s) {
  if (s == "full") return Representation::kFull;
  if (s == "partial") return Representation::kPartial;
  if (s == "random") return Representation::kRandom;
  throw ConfigError("unknown representation '" + s +
                    "' (expected full|partial|random)");
}

void ExperimentConfig::validate() const {
  auto probability = [](const char* name, double p) {
    if (!(p >= 0.0 && p <= 1.0))
      throw ConfigError(std::string(name) + " must be in [0, 1]");
  };
  probability("p_crossover", p_crossover);
  probability("p_gene_mutation", p_gene_mutation);
  probability("p_add", p_add);
  probability("p_remove", p_remove);
  if (map_path.empty()) throw ConfigError("map path is required");
  if (population_size < 1) throw ConfigError("population_size must be >= 1");
  if (min_obstacles < 1) throw ConfigError("min_obstacles must be >= 1");
  if (max_obstacles < min_obstacles)
    throw ConfigError("max_obstacles must be >= min_obstacles");
  if (duration <= 0.0) throw ConfigError("duration_s must be > 0");
  if (wall_clock_minutes <= 0.0 && generations < 0)
    throw ConfigError("budget must be positive (generations or wall clock)");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (representations.empty())
    throw ConfigError("at least one representation is required");
}

ConstraintTable constraints_from_table(const ConfigTable& t) {
  ConstraintTable c = ConstraintTable::defaults();
  auto load_kind = [&](const std::string& key, TypeBounds& b) {
    auto load_range = [&](const std::string& field, Range& r, bool kmh) {
      const auto arr = t.get_double_array("constraints." + key + "." + field);
      if (arr.empty()) return;
      if (arr.size() != 2)
        throw ConfigError("constraints." + key + "." + field +
                          " must be [min, max]");
      r.min = kmh ? kmh_to_mps(arr[0]) : arr[0];
      r.max = kmh ? kmh_to_mps(arr[1]) : arr[1];
      if (r.min > r.max || r.min <= 0.0)
        throw ConfigError("constraints." + key + "." + field +
                          " must be positive with min <= max");
    };
    load_range("width_m", b.width, false);
    load_range("length_m", b.length, false);
    load_range("height_m", b.height, false);
    load_range("speed_kmh", b.speed, true);
  };
  load_kind("vehicle", c.vehicle);
  load_kind("pedestrian", c.pedestrian);
  load_kind("bicycle", c.bicycle);
  c.static_probability =
      t.get_double("sampling.static_probability", c.static_probability);
  if (!(c.static_probability >= 0.0 && c.static_probability <= 1.0))
    throw ConfigError("sampling.static_probability must be in [0, 1]");
  return c;
}

ExperimentConfig experiment_config_from_table(const ConfigTable& t) {
  ExperimentConfig cfg;

  const auto reps = t.get_string_array("experiment.representations");
  if (!reps.empty()) {
    cfg.representations.clear();
    for (const auto& r : reps)
      cfg.representations.push_back(representation_from_string(r));
  } else if (t.has("experiment.representation")) {
    cfg.representations = {representation_from_string(
        t.get_string("experiment.representation", "full"))};
  }

  cfg.map_path = t.get_string("experiment.map", cfg.map_path);
  cfg.output_dir = t.get_string("experiment.output_dir", cfg.output_dir);
  cfg.population_size = static_cast<int>(
      t.get_int("experiment.population_size", cfg.population_size));
  cfg.min_obstacles =
      static_cast<int>(t.get_int("experiment.min_obstacles", cfg.min_obstacles));
  cfg.max_obstacles =
      static_cast<int>(t.get_int("experiment.max_obstacles", cfg.max_obstacles));
  cfg.duration = t.get_double("experiment.duration_s", cfg.duration);
  cfg.generations =
      static_cast<int>(t.get_int("experiment.generations", cfg.generations));
  cfg.wall_clock_minutes =
      t.get_double("experiment.wall_clock_minutes", cfg.wall_clock_minutes);
  const auto seeds = t.get_double_array("experiment.seeds");
  if (!seeds.empty()) {
    cfg.seeds.clear();
    for (double s : seeds)
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  cfg.p_crossover = t.get_double("experiment.p_crossover", cfg.p_crossover);
  cfg.p_gene_mutation =
      t.get_double("experiment.p_gene_mutation", cfg.p_gene_mutation);
  cfg.p_add = t.get_double("experiment.p_add", cfg.p_add);
  cfg.p_remove = t.get_double("experiment.p_remove", cfg.p_remove);
  cfg.workers = static_cast<int>(t.get_int("experiment.workers", cfg.workers));
  cfg.min_ego_route_length = t.get_double("experiment.min_ego_route_length_m",
                                          cfg.min_ego_route_length);
  cfg.lane_change_penalty =
      t.get_double("routing.lane_change_penalty_m", cfg.lane_change_penalty);

  Thresholds& th = cfg.thresholds;
  th.beta_safe = kmh_to_mps(
      t.get_double("thresholds.beta_safe_kmh", mps_to_kmh(th.beta_safe)));
  th.delta_safe = t.get_double("thresholds.delta_safe_s", th.delta_safe);
  th.gamma_comfort =
      t.get_double("thresholds.gamma_comfort_mps2", th.gamma_comfort);
  th.epsilon_comfort =
      t.get_double("thresholds.epsilon_comfort_mps2", th.epsilon_comfort);
  th.collision_distance =
      t.get_double("thresholds.collision_distance_m", th.collision_distance);
  th.merge_gap = t.get_double("thresholds.merge_gap_s", th.merge_gap);

  PlannerConfig& p = cfg.planner;
  p.dt = t.get_double("planner.dt_s", p.dt);
  p.overshoot_bias = t.get_double("planner.overshoot_bias_mps", p.overshoot_bias);
  p.max_accel = t.get_double("planner.max_accel_mps2", p.max_accel);
  p.max_brake = t.get_double("planner.max_brake_mps2", p.max_brake);
  p.speed_gain = t.get_double("planner.speed_gain", p.speed_gain);
  p.horizon = t.get_double("planner.horizon_s", p.horizon);
  p.prediction_step = t.get_double("planner.prediction_step_s", p.prediction_step);
  p.reaction_delay = t.get_double("planner.reaction_delay_s", p.reaction_delay);
  p.yield_distance = t.get_double("planner.yield_distance_m", p.yield_distance);
  p.release_distance =
      t.get_double("planner.release_distance_m", p.release_distance);
  p.standoff = t.get_double("planner.standoff_m", p.standoff);
  p.stop_margin = t.get_double("planner.stop_margin_m", p.stop_margin);
  p.arrival_decel = t.get_double("planner.arrival_decel_mps2", p.arrival_decel);
  p.lane_change_duration =
      t.get_double("planner.lane_change_duration_s", p.lane_change_duration);
  p.lane_change_pause_radius = t.get_double(
      "planner.lane_change_pause_radius_m", p.lane_change_pause_radius);
  p.ego_length = t.get_double("planner.ego_length_m", p.ego_length);
  p.ego_width = t.get_double("planner.ego_width_m", p.ego_width);
  p.ego_height = t.get_double("planner.ego_height_m", p.ego_height);
  if (p.dt <= 0.0) throw ConfigError("planner.dt_s must be > 0");

  cfg.constraints = constraints_from_table(t);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_table(ConfigTable::parse_file(path));
}

}  // namespace scenforge
