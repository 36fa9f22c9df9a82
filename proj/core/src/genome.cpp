#include "scenforge/genome.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scenforge {

using ordered_json = nlohmann::ordered_json;

const char* to_string(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::kVehicle: return "VEHICLE";
    case ObstacleKind::kPedestrian: return "PEDESTRIAN";
    case ObstacleKind::kBicycle: return "BICYCLE";
  }
  return "VEHICLE";
}

const char* to_string(Mobility mobility) {
  return mobility == Mobility::kStatic ? "STATIC" : "DYNAMIC";
}

ObstacleKind obstacle_kind_from_string(const std::string& s) {
  if (s == "VEHICLE") return ObstacleKind::kVehicle;
  if (s == "PEDESTRIAN") return ObstacleKind::kPedestrian;
  if (s == "BICYCLE") return ObstacleKind::kBicycle;
  throw std::invalid_argument("unknown obstacle kind '" + s + "'");
}

Mobility mobility_from_string(const std::string& s) {
  if (s == "STATIC") return Mobility::kStatic;
  if (s == "DYNAMIC") return Mobility::kDynamic;
  throw std::invalid_argument("unknown mobility '" + s + "'");
}

std::int64_t ScenarioGenome::next_free_id() const {
  std::int64_t max_id = 0;
  for (const auto& o : obstacles) max_id = std::max(max_id, o.id);
  return max_id + 1;
}

static ordered_json obstacle_to_json(const ObstacleGenome& o) {
  // Keys follow the declared gene order.
  ordered_json j;
  j["id"] = o.id;
  j["start"] = {o.start.x, o.start.y};
  j["end"] = {o.end.x, o.end.y};
  j["heading_rad"] = o.heading;
  j["length_m"] = o.length;
  j["width_m"] = o.width;
  j["height_m"] = o.height;
  j["speed_mps"] = o.speed;
  j["kind"] = to_string(o.kind);
  j["mobility"] = to_string(o.mobility);
  return j;
}

static ObstacleGenome obstacle_from_json(const ordered_json& j) {
  ObstacleGenome o;
  o.id = j.at("id").get<std::int64_t>();
  o.start = {j.at("start").at(0).get<double>(), j.at("start").at(1).get<double>()};
  o.end = {j.at("end").at(0).get<double>(), j.at("end").at(1).get<double>()};
  o.heading = j.at("heading_rad").get<double>();
  o.length = j.at("length_m").get<double>();
  o.width = j.at("width_m").get<double>();
  o.height = j.at("height_m").get<double>();
  o.speed = j.at("speed_mps").get<double>();
  o.kind = obstacle_kind_from_string(j.at("kind").get<std::string>());
  o.mobility = mobility_from_string(j.at("mobility").get<std::string>());
  return o;
}

std::string scenario_to_json_text(const ScenarioGenome& scenario,
                                  const std::string& map_id) {
  ordered_json j;
  j["schema_version"] = 1;
  j["map_id"] = map_id;
  j["scenario_id"] = scenario.id;
  j["ego"] = {{"start", {scenario.ego_start.x, scenario.ego_start.y}},
              {"end", {scenario.ego_end.x, scenario.ego_end.y}}};
  j["duration_s"] = scenario.duration;
  j["obstacles"] = ordered_json::array();
  for (const auto& o : scenario.obstacles)
    j["obstacles"].push_back(obstacle_to_json(o));
  return j.dump(2) + "\n";
}

ScenarioGenome scenario_from_json_text(const std::string& text,
                                       std::string* map_id) {
  ordered_json j = ordered_json::parse(text);
  const int version = j.at("schema_version").get<int>();
  if (version != 1)
    throw std::runtime_error("unsupported scenario schema_version " +
                             std::to_string(version));
  ScenarioGenome s;
  s.id = j.at("scenario_id").get<std::string>();
  if (map_id) *map_id = j.at("map_id").get<std::string>();
  s.ego_start = {j.at("ego").at("start").at(0).get<double>(),
                 j.at("ego").at("start").at(1).get<double>()};
  s.ego_end = {j.at("ego").at("end").at(0).get<double>(),
               j.at("ego").at("end").at(1).get<double>()};
  s.duration = j.at("duration_s").get<double>();
  for (const auto& jo : j.at("obstacles"))
    s.obstacles.push_back(obstacle_from_json(jo));
  return s;
}

void write_scenario(const ScenarioGenome& scenario, const std::string& map_id,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write scenario file '" + path + "'");
  out << scenario_to_json_text(scenario, map_id);
}

ScenarioGenome read_scenario(const std::string& path, std::string* map_id) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str(), map_id);
}

}  // namespace scenforge
