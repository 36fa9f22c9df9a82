#include "scenforge/lane_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace scenforge {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kProjectionSlack = 2.0;  // meters beyond half width
constexpr double kJoinTolerance = 0.5;    // successor endpoint gap

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace

std::size_t LaneMap::index_of(const std::string& lane_id) const {
  auto it = index_.find(lane_id);
  if (it == index_.end()) throw MapError("unknown lane id '" + lane_id + "'");
  return it->second;
}

const Lane* LaneMap::find(const std::string& lane_id) const {
  auto it = index_.find(lane_id);
  return it == index_.end() ? nullptr : &lanes_[it->second];
}

const Lane& LaneMap::at(const std::string& lane_id) const {
  return lanes_[index_of(lane_id)];
}

void LaneMap::build_derived() {
  index_.clear();
  lane_aabbs_.clear();
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    Lane& lane = lanes_[i];
    if (!index_.emplace(lane.id, i).second)
      throw MapError("duplicate lane id '" + lane.id + "'");
    lane.cum_s.assign(lane.centerline.size(), 0.0);
    for (std::size_t k = 1; k < lane.centerline.size(); ++k)
      lane.cum_s[k] = lane.cum_s[k - 1] +
                      distance(lane.centerline[k - 1], lane.centerline[k]);
    LaneAabb box{std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
    for (const auto& p : lane.centerline) {
      box.min_x = std::min(box.min_x, p.x);
      box.min_y = std::min(box.min_y, p.y);
      box.max_x = std::max(box.max_x, p.x);
      box.max_y = std::max(box.max_y, p.y);
    }
    const double pad = 0.5 * lane.width + kProjectionSlack;
    box.min_x -= pad;
    box.min_y -= pad;
    box.max_x += pad;
    box.max_y += pad;
    lane_aabbs_.push_back(box);
  }
}

void LaneMap::validate() const {
  if (lanes_.empty()) throw MapError("map must contain >=1 lane");
  for (const Lane& lane : lanes_) {
    const std::string where = "lane '" + lane.id + "': ";
    if (lane.centerline.size() < 2)
      throw MapError(where + "centerline needs >=2 points");
    for (std::size_t k = 1; k < lane.centerline.size(); ++k) {
      if (distance(lane.centerline[k - 1], lane.centerline[k]) < 1e-9)
        throw MapError(where + "zero-length centerline segment at index " +
                       std::to_string(k - 1));
    }
    for (const auto& p : lane.centerline) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw MapError(where + "non-finite centerline point");
    }
    if (!(lane.width > 0.0)) throw MapError(where + "width must be > 0");
    if (!(lane.speed_limit > 0.0))
      throw MapError(where + "speed_limit must be > 0");

    for (const auto& succ : lane.successors) {
      const Lane* next = find(succ);
      if (!next)
        throw MapError(where + "dangling successor id '" + succ + "'");
      const double gap =
          distance(lane.centerline.back(), next->centerline.front());
      if (gap > kJoinTolerance) {
        std::ostringstream msg;
        msg << where << "successor '" << succ << "' joins " << gap
            << " m away (limit " << kJoinTolerance << ")";
        throw MapError(msg.str());
      }
    }
    for (const auto& pred : lane.predecessors) {
      if (!find(pred))
        throw MapError(where + "dangling predecessor id '" + pred + "'");
    }
    if (!lane.left_neighbor.empty()) {
      const Lane* n = find(lane.left_neighbor);
      if (!n) throw MapError(where + "dangling left_neighbor");
      if (n->right_neighbor != lane.id)
        throw MapError(where + "left_neighbor '" + n->id +
                       "' is not symmetric");
    }
    if (!lane.right_neighbor.empty()) {
      const Lane* n = find(lane.right_neighbor);
      if (!n) throw MapError(where + "dangling right_neighbor");
      if (n->left_neighbor != lane.id)
        throw MapError(where + "right_neighbor '" + n->id +
                       "' is not symmetric");
    }
  }
  if (!(bbox_.min_x <= bbox_.max_x && bbox_.min_y <= bbox_.max_y))
    throw MapError("bounding_box is inverted");
}

LaneMap LaneMap::from_json_text(const std::string& text,
                                const std::string& map_id) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw MapError(std::string("map parse error: ") + e.what());
  }

  LaneMap map;
  map.id_ = map_id;
  if (!doc.contains("bounding_box"))
    throw MapError("missing required field 'bounding_box'");
  const auto& bb = doc["bounding_box"];
  for (const char* key : {"min_x", "min_y", "max_x", "max_y"}) {
    if (!bb.contains(key))
      throw MapError(std::string("bounding_box missing '") + key + "'");
  }
  map.bbox_ = {bb["min_x"].get<double>(), bb["min_y"].get<double>(),
               bb["max_x"].get<double>(), bb["max_y"].get<double>()};

  if (!doc.contains("lanes")) throw MapError("missing required field 'lanes'");
  for (const auto& jl : doc["lanes"]) {
    for (const char* key :
         {"id", "width_m", "speed_limit_mps", "centerline", "successors",
          "predecessors"}) {
      if (!jl.contains(key))
        throw MapError("lane record missing required field '" +
                       std::string(key) + "'");
    }
    Lane lane;
    lane.id = jl["id"].get<std::string>();
    lane.width = jl["width_m"].get<double>();
    lane.speed_limit = jl["speed_limit_mps"].get<double>();
    for (const auto& jp : jl["centerline"])
      lane.centerline.push_back({jp.at(0).get<double>(), jp.at(1).get<double>()});
    lane.successors = jl["successors"].get<std::vector<std::string>>();
    lane.predecessors = jl["predecessors"].get<std::vector<std::string>>();
    if (jl.contains("left_neighbor") && !jl["left_neighbor"].is_null())
      lane.left_neighbor = jl["left_neighbor"].get<std::string>();
    if (jl.contains("right_neighbor") && !jl["right_neighbor"].is_null())
      lane.right_neighbor = jl["right_neighbor"].get<std::string>();
    map.lanes_.push_back(std::move(lane));
  }

  map.build_derived();
  map.validate();
  return map;
}

LaneMap LaneMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MapError("cannot open map file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos)
    stem = stem.substr(0, dot);
  return from_json_text(buf.str(), stem);
}

std::string LaneMap::to_json_text() const {
  ordered_json doc;
  doc["bounding_box"] = {{"min_x", bbox_.min_x},
                         {"min_y", bbox_.min_y},
                         {"max_x", bbox_.max_x},
                         {"max_y", bbox_.max_y}};
  doc["lanes"] = ordered_json::array();
  for (const Lane& lane : lanes_) {
    ordered_json jl;
    jl["id"] = lane.id;
    jl["width_m"] = lane.width;
    jl["speed_limit_mps"] = lane.speed_limit;
    auto pts = ordered_json::array();
    for (const auto& p : lane.centerline) pts.push_back({p.x, p.y});
    jl["centerline"] = std::move(pts);
    jl["successors"] = lane.successors;
    jl["predecessors"] = lane.predecessors;
    if (!lane.left_neighbor.empty()) jl["left_neighbor"] = lane.left_neighbor;
    if (!lane.right_neighbor.empty())
      jl["right_neighbor"] = lane.right_neighbor;
    doc["lanes"].push_back(std::move(jl));
  }
  return doc.dump(2) + "\n";
}

void LaneMap::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw MapError("cannot write map file '" + path + "'");
  out << to_json_text();
}

std::optional<LaneProjection> LaneMap::project(MapPoint p) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return std::nullopt;
  std::optional<LaneProjection> best;
  double best_abs = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    const auto& box = lane_aabbs_[i];
    if (p.x < box.min_x || p.x > box.max_x || p.y < box.min_y ||
        p.y > box.max_y)
      continue;
    const Lane& lane = lanes_[i];
    double lane_best = std::numeric_limits<double>::infinity();
    double lane_s = 0.0, lane_lat = 0.0;
    for (std::size_t k = 0; k + 1 < lane.centerline.size(); ++k) {
      const MapPoint a = lane.centerline[k];
      const MapPoint b = lane.centerline[k + 1];
      const MapPoint ab = b - a;
      const double len = distance(a, b);
      double t = dot(p - a, ab) / (len * len);
      t = std::clamp(t, 0.0, 1.0);
      const MapPoint q = a + t * ab;
      const double d = distance(p, q);
      if (d < lane_best) {
        lane_best = d;
        lane_s = lane.cum_s[k] + t * len;
        lane_lat = (cross(ab, p - q) >= 0.0) ? d : -d;
      }
    }
    if (lane_best <= 0.5 * lane.width + kProjectionSlack &&
        lane_best < best_abs) {
      best_abs = lane_best;
      best = LaneProjection{lane.id, lane_s, lane_lat};
    }
  }
  return best;
}

MapPoint LaneMap::point_at(const std::string& lane_id, double s) const {
  const Lane& lane = lanes_[index_of(lane_id)];
  s = std::clamp(s, 0.0, lane.length());
  auto it = std::upper_bound(lane.cum_s.begin(), lane.cum_s.end(), s);
  std::size_t k = (it == lane.cum_s.begin())
                      ? 0
                      : static_cast<std::size_t>(it - lane.cum_s.begin()) - 1;
  if (k + 1 >= lane.centerline.size()) k = lane.centerline.size() - 2;
  const double seg_len = lane.cum_s[k + 1] - lane.cum_s[k];
  const double t = seg_len > 0.0 ? (s - lane.cum_s[k]) / seg_len : 0.0;
  return lane.centerline[k] + t * (lane.centerline[k + 1] - lane.centerline[k]);
}

double LaneMap::heading_at(const std::string& lane_id, double s) const {
  const Lane& lane = lanes_[index_of(lane_id)];
  if (s < -1e-9 || s > lane.length() + 1e-9)
    throw std::out_of_range("heading_at: s=" + std::to_string(s) +
                            " outside lane '" + lane_id + "' of length " +
                            std::to_string(lane.length()));
  s = std::clamp(s, 0.0, lane.length());
  auto it = std::upper_bound(lane.cum_s.begin(), lane.cum_s.end(), s);
  std::size_t k = (it == lane.cum_s.begin())
                      ? 0
                      : static_cast<std::size_t>(it - lane.cum_s.begin()) - 1;
  if (k + 1 >= lane.centerline.size()) k = lane.centerline.size() - 2;
  const MapPoint d = lane.centerline[k + 1] - lane.centerline[k];
  return wrap_angle(std::atan2(d.y, d.x));
}

namespace {

struct SearchState {
  std::size_t lane;
  double entry_s;
};

struct StateKey {
  std::size_t lane;
  std::int64_t entry_micro;
  bool operator<(const StateKey& o) const {
    return lane != o.lane ? lane < o.lane : entry_micro < o.entry_micro;
  }
};

StateKey key_of(const SearchState& s) {
  return {s.lane, static_cast<std::int64_t>(std::llround(s.entry_s * 1e6))};
}

}  // namespace

std::optional<RoutePath> LaneMap::shortest_route(MapPoint src,
                                                 MapPoint dst) const {
  const auto from = project(src);
  const auto to = project(dst);
  if (!from || !to) return std::nullopt;
  const std::size_t src_lane = index_of(from->lane_id);
  const std::size_t dst_lane = index_of(to->lane_id);
  const double s_src = from->s;
  const double s_dst = to->s;

  struct QueueEntry {
    double cost;
    std::uint64_t order;  // deterministic tie-break
    SearchState state;
    bool operator>(const QueueEntry& o) const {
      return cost != o.cost ? cost > o.cost : order > o.order;
    }
  };
  struct Visit {
    double cost;
    StateKey parent;
    RouteTransition via;
    bool has_parent;
  };

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> pq;
  std::map<StateKey, Visit> visited;
  std::uint64_t order = 0;

  const SearchState start{src_lane, s_src};
  visited[key_of(start)] = {0.0, {}, RouteTransition::kSuccessor, false};
  pq.push({0.0, order++, start});

  double best_cost = std::numeric_limits<double>::infinity();
  StateKey best_key{};
  bool found = false;

  while (!pq.empty()) {
    const QueueEntry top = pq.top();
    pq.pop();
    if (top.cost >= best_cost) break;
    const StateKey k = key_of(top.state);
    const auto vit = visited.find(k);
    if (vit == visited.end() || top.cost > vit->second.cost + 1e-12) continue;

    const Lane& lane = lanes_[top.state.lane];
    const double entry = top.state.entry_s;

    if (top.state.lane == dst_lane && entry <= s_dst + 1e-9) {
      const double total = top.cost + (s_dst - entry);
      if (total < best_cost) {
        best_cost = total;
        best_key = k;
        found = true;
      }
    }

    auto relax = [&](const SearchState& next, double cost,
                     RouteTransition via) {
      const StateKey nk = key_of(next);
      auto it = visited.find(nk);
      if (it == visited.end() || cost < it->second.cost - 1e-12) {
        visited[nk] = {cost, k, via, true};
        pq.push({cost, order++, next});
      }
    };

    const double run_out = lane.length() - entry;
    for (const auto& succ_id : lane.successors) {
      relax({index_of(succ_id), 0.0}, top.cost + run_out,
            RouteTransition::kSuccessor);
    }
    for (const std::string* nid : {&lane.left_neighbor, &lane.right_neighbor}) {
      if (nid->empty()) continue;
      const std::size_t n = index_of(*nid);
      const double frac = lane.length() > 0.0 ? entry / lane.length() : 0.0;
      const double mapped = std::min(frac * lanes_[n].length(),
                                     lanes_[n].length());
      relax({n, mapped}, top.cost + lane_change_penalty_,
            RouteTransition::kNeighbor);
    }
  }

  if (!found) return std::nullopt;

  // Reconstruct the lane chain from the winning goal state.
  std::vector<std::pair<StateKey, RouteTransition>> chain;
  StateKey cur = best_key;
  while (true) {
    const Visit& v = visited.at(cur);
    chain.push_back({cur, v.via});
    if (!v.has_parent) break;
    cur = v.parent;
  }
  std::reverse(chain.begin(), chain.end());

  RoutePath route;
  for (const auto& [k, via] : chain)
    route.lane_sequence.push_back(lanes_[k.lane].id);
  route.start_offset = s_src;
  route.end_offset = s_dst;
  route.cost = best_cost;
  route.total_length = polyline_length(realize_polyline(route));
  return route;
}

std::vector<RouteLeg> LaneMap::route_legs(const RoutePath& route) const {
  std::vector<RouteLeg> legs;
  if (route.lane_sequence.empty()) return legs;
  double entry = route.start_offset;
  for (std::size_t i = 0; i < route.lane_sequence.size(); ++i) {
    const Lane& lane = lanes_[index_of(route.lane_sequence[i])];
    RouteLeg leg;
    leg.lane_id = lane.id;
    leg.s_in = entry;
    const bool last = i + 1 == route.lane_sequence.size();
    if (last) {
      leg.s_out = route.end_offset;
      legs.push_back(leg);
      break;
    }
    const Lane& next = lanes_[index_of(route.lane_sequence[i + 1])];
    const bool is_succ =
        std::find(lane.successors.begin(), lane.successors.end(), next.id) !=
        lane.successors.end();
    if (is_succ) {
      leg.s_out = lane.length();
      leg.to_next = RouteTransition::kSuccessor;
      entry = 0.0;
    } else {
      // Neighbor hop at the entry point; longitudinal fraction carries over.
      leg.s_out = entry;
      leg.to_next = RouteTransition::kNeighbor;
      const double frac = lane.length() > 0.0 ? entry / lane.length() : 0.0;
      entry = std::min(frac * next.length(), next.length());
    }
    legs.push_back(leg);
  }
  return legs;
}

double LaneMap::polyline_length(const std::vector<MapPoint>& pts) const {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    len += distance(pts[i - 1], pts[i]);
  return len;
}

std::vector<MapPoint> LaneMap::realize_polyline(const RoutePath& route,
                                                double blend_window,
                                                double sample_step) const {
  std::vector<MapPoint> pts;
  auto legs = route_legs(route);
  auto push = [&](MapPoint p) {
    if (pts.empty() || distance(pts.back(), p) > 1e-9) pts.push_back(p);
  };

  for (std::size_t i = 0; i < legs.size(); ++i) {
    RouteLeg& leg = legs[i];
    const Lane& lane = lanes_[index_of(leg.lane_id)];
    const bool last = i + 1 == legs.size();

    if (leg.s_out > leg.s_in + 1e-9) {
      const double span = leg.s_out - leg.s_in;
      const int n = std::max(1, static_cast<int>(std::ceil(span / sample_step)));
      for (int k = 0; k <= n; ++k)
        push(point_at(lane.id, leg.s_in + span * k / n));
    } else if (pts.empty()) {
      push(point_at(lane.id, leg.s_in));
    }

    if (!last && leg.to_next == RouteTransition::kNeighbor) {
      RouteLeg& nxt = legs[i + 1];
      const Lane& next = lanes_[index_of(nxt.lane_id)];
      const double uL = leg.s_out;
      const double uN = nxt.s_in;
      const double room_next =
          (i + 2 == legs.size() || nxt.s_out > nxt.s_in)
              ? nxt.s_out - nxt.s_in
              : next.length() - uN;
      const double wL = std::min(blend_window, lane.length() - uL);
      const double wN = std::min(blend_window, std::max(room_next, 0.0));
      const double w = std::max(std::max(wL, wN), 1e-9);
      const int n = std::max(2, static_cast<int>(std::ceil(w / sample_step)));
      for (int k = 1; k <= n; ++k) {
        const double t = static_cast<double>(k) / n;
        const MapPoint a = point_at(lane.id, uL + t * wL);
        const MapPoint b = point_at(next.id, uN + t * wN);
        const double m = smoothstep(t);
        push({(1.0 - m) * a.x + m * b.x, (1.0 - m) * a.y + m * b.y});
      }
      nxt.s_in = std::min(uN + wN, next.length());
      if (nxt.s_out < nxt.s_in) nxt.s_out = nxt.s_in;
    }
  }
  if (pts.empty() && !legs.empty())
    pts.push_back(point_at(legs[0].lane_id, legs[0].s_in));
  return pts;
}

}  // namespace scenforge
