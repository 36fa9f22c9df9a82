#include "scenforge/trace.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scenforge {

using ordered_json = nlohmann::ordered_json;

namespace {

double round9(double v) { return std::round(v * 1e9) / 1e9; }

}  // namespace

std::string record_to_text(const Trace& trace) {
  std::ostringstream out;
  ordered_json header;
  header["schema_version"] = kRecordSchemaVersion;
  header["map_id"] = trace.map_id;
  header["scenario_id"] = trace.scenario_id;
  header["dt"] = round9(trace.dt);
  header["duration"] = round9(trace.duration);
  header["ego"] = {{"length", round9(trace.ego_length)},
                   {"width", round9(trace.ego_width)},
                   {"height", round9(trace.ego_height)}};
  header["obstacles"] = ordered_json::array();
  for (const auto& o : trace.obstacles) {
    header["obstacles"].push_back({{"id", o.id},
                                   {"kind", to_string(o.kind)},
                                   {"length", round9(o.length)},
                                   {"width", round9(o.width)},
                                   {"height", round9(o.height)}});
  }
  out << header.dump() << "\n";

  for (std::size_t j = 0; j < trace.ego.size(); ++j) {
    const EgoState& e = trace.ego[j];
    ordered_json line;
    line["t"] = round9(e.t);
    line["ego"] = {round9(e.position.x), round9(e.position.y),
                   round9(e.heading),    round9(e.speed),
                   round9(e.acceleration)};
    line["lane"] = e.current_lane;
    line["straddle"] = e.straddling ? 1 : 0;
    auto obs = ordered_json::array();
    for (const auto& o : trace.obstacles) {
      const ObstacleState& s = o.states[j];
      obs.push_back({round9(s.position.x), round9(s.position.y),
                     round9(s.heading), round9(s.speed)});
    }
    line["obs"] = std::move(obs);
    out << line.dump() << "\n";
  }
  return out.str();
}

Trace record_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("record file is empty");
  ordered_json header = ordered_json::parse(line);
  const int version = header.at("schema_version").get<int>();
  if (version != kRecordSchemaVersion)
    throw std::runtime_error("unsupported record schema_version " +
                             std::to_string(version));
  Trace trace;
  trace.map_id = header.at("map_id").get<std::string>();
  trace.scenario_id = header.at("scenario_id").get<std::string>();
  trace.dt = header.at("dt").get<double>();
  trace.duration = header.at("duration").get<double>();
  trace.ego_length = header.at("ego").at("length").get<double>();
  trace.ego_width = header.at("ego").at("width").get<double>();
  trace.ego_height = header.at("ego").at("height").get<double>();
  for (const auto& jo : header.at("obstacles")) {
    TraceObstacle o;
    o.id = jo.at("id").get<std::int64_t>();
    o.kind = obstacle_kind_from_string(jo.at("kind").get<std::string>());
    o.length = jo.at("length").get<double>();
    o.width = jo.at("width").get<double>();
    o.height = jo.at("height").get<double>();
    trace.obstacles.push_back(std::move(o));
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ordered_json tick = ordered_json::parse(line);
    EgoState e;
    e.t = tick.at("t").get<double>();
    const auto& je = tick.at("ego");
    e.position = {je.at(0).get<double>(), je.at(1).get<double>()};
    e.heading = je.at(2).get<double>();
    e.speed = je.at(3).get<double>();
    e.acceleration = je.at(4).get<double>();
    e.current_lane = tick.at("lane").get<std::string>();
    e.straddling = tick.at("straddle").get<int>() != 0;
    const auto& jobs = tick.at("obs");
    if (jobs.size() != trace.obstacles.size())
      throw std::runtime_error("record tick has wrong obstacle count");
    for (std::size_t k = 0; k < trace.obstacles.size(); ++k) {
      ObstacleState s;
      s.position = {jobs[k].at(0).get<double>(), jobs[k].at(1).get<double>()};
      s.heading = jobs[k].at(2).get<double>();
      s.speed = jobs[k].at(3).get<double>();
      trace.obstacles[k].states.push_back(s);
    }
    trace.ego.push_back(std::move(e));
  }
  return trace;
}

void write_record(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write record file '" + path + "'");
  out << record_to_text(trace);
}

Trace read_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open record file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return record_from_text(buf.str());
}

}  // namespace scenforge
