#include "scenforge/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace scenforge {

namespace {

// Gene indices in declared order.
enum Gene : int {
  kGeneId = 0,
  kGeneStart,
  kGeneEnd,
  kGeneHeading,
  kGeneLength,
  kGeneWidth,
  kGeneHeight,
  kGeneSpeed,
  kGeneKind,
  kGeneMobility,
};

void rederive_heading(ObstacleGenome& g, const LaneMap& map) {
  if (const auto proj = map.project(g.start))
    g.heading = map.heading_at(proj->lane_id, proj->s);
}

void swap_gene(ObstacleGenome& a, ObstacleGenome& b, int gene) {
  switch (gene) {
    case kGeneId: std::swap(a.id, b.id); break;
    case kGeneStart: std::swap(a.start, b.start); break;
    case kGeneEnd: std::swap(a.end, b.end); break;
    case kGeneHeading: std::swap(a.heading, b.heading); break;
    case kGeneLength: std::swap(a.length, b.length); break;
    case kGeneWidth: std::swap(a.width, b.width); break;
    case kGeneHeight: std::swap(a.height, b.height); break;
    case kGeneSpeed: std::swap(a.speed, b.speed); break;
    case kGeneKind: std::swap(a.kind, b.kind); break;
    case kGeneMobility: std::swap(a.mobility, b.mobility); break;
  }
}

// Resamples one gene in place; returns true if the start point moved.
bool resample_gene(ObstacleGenome& g, int gene, const ConstraintTable& table,
                   const LaneMap& map, Rng& rng) {
  const TypeBounds& b = table.bounds(g.kind);
  switch (gene) {
    case kGeneStart:
      g.start = sample_lane_point(map, rng);
      return true;
    case kGeneEnd:
      g.end = sample_lane_point(map, rng);
      return false;
    case kGeneHeading:
      g.heading = wrap_angle(rng.uniform(0.0, 2.0 * std::numbers::pi));
      return false;
    case kGeneLength:
      g.length = rng.uniform(b.length.min, b.length.max);
      return false;
    case kGeneWidth:
      g.width = rng.uniform(b.width.min, b.width.max);
      return false;
    case kGeneHeight:
      g.height = rng.uniform(b.height.min, b.height.max);
      return false;
    case kGeneSpeed:
      g.speed = rng.uniform(b.speed.min, b.speed.max);
      return false;
    case kGeneKind:
      switch (rng.uniform_int(3)) {
        case 0: g.kind = ObstacleKind::kVehicle; break;
        case 1: g.kind = ObstacleKind::kPedestrian; break;
        default: g.kind = ObstacleKind::kBicycle; break;
      }
      return false;
    case kGeneMobility:
      g.mobility = rng.chance(table.static_probability) ? Mobility::kStatic
                                                        : Mobility::kDynamic;
      return false;
    default:
      return false;
  }
}

}  // namespace

std::pair<ObstacleGenome, ObstacleGenome> two_point_crossover(
    const ObstacleGenome& a, const ObstacleGenome& b,
    const ConstraintTable& table, const LaneMap& map, Rng& rng,
    IdAllocator& ids) {
  // Uniform draw over the 66 cut pairs 0 <= i <= j <= 10.
  const int pair_count = (kGeneCount + 1) * (kGeneCount + 2) / 2;
  int r = static_cast<int>(rng.uniform_int(pair_count));
  int i = 0;
  while (r > kGeneCount - i) {
    r -= kGeneCount - i + 1;
    ++i;
  }
  return two_point_crossover_at(a, b, i, i + r, table, map, rng, ids);
}

std::pair<ObstacleGenome, ObstacleGenome> two_point_crossover_at(
    const ObstacleGenome& a, const ObstacleGenome& b, int cut_lo, int cut_hi,
    const ConstraintTable& table, const LaneMap& map, Rng& rng,
    IdAllocator& ids) {
  const int i = cut_lo;
  const int j = cut_hi;
  ObstacleGenome ca = a;
  ObstacleGenome cb = b;
  for (int gene = i; gene < j; ++gene) swap_gene(ca, cb, gene);

  const bool id_swapped = i <= kGeneId && kGeneId < j;
  const bool start_swapped = i <= kGeneStart && kGeneStart < j;
  const bool heading_swapped = i <= kGeneHeading && kGeneHeading < j;
  if (id_swapped) {
    ca.id = ids.allocate();
    cb.id = ids.allocate();
  }
  if (start_swapped && !heading_swapped) {
    rederive_heading(ca, map);
    rederive_heading(cb, map);
  }
  return {repair(ca, table, map, rng), repair(cb, table, map, rng)};
}

ObstacleGenome mutate_genes(const ObstacleGenome& ind,
                            const ConstraintTable& table, const LaneMap& map,
                            Rng& rng, double p_gene) {
  ObstacleGenome g = ind;
  bool start_moved = false;
  for (int gene = kGeneStart; gene <= kGeneMobility; ++gene) {
    if (rng.chance(p_gene))
      start_moved |= resample_gene(g, gene, table, map, rng);
  }
  if (start_moved) rederive_heading(g, map);
  return repair(g, table, map, rng);
}

ObstacleGenome mutate_single_gene(const ObstacleGenome& ind,
                                  const ConstraintTable& table,
                                  const LaneMap& map, Rng& rng) {
  ObstacleGenome g = ind;
  const int gene = kGeneStart + static_cast<int>(rng.uniform_int(kGeneCount - 1));
  const bool start_moved = resample_gene(g, gene, table, map, rng);
  if (start_moved) rederive_heading(g, map);
  return repair(g, table, map, rng);
}

void swap_obstacles(ScenarioGenome& a, ScenarioGenome& b, Rng& rng) {
  if (a.obstacles.empty() || b.obstacles.empty()) return;
  const std::size_t ia = rng.uniform_int(a.obstacles.size());
  const std::size_t ib = rng.uniform_int(b.obstacles.size());
  std::swap(a.obstacles[ia], b.obstacles[ib]);
  auto id_taken = [](const ScenarioGenome& s, std::int64_t id,
                     std::size_t except) {
    for (std::size_t k = 0; k < s.obstacles.size(); ++k)
      if (k != except && s.obstacles[k].id == id) return true;
    return false;
  };
  if (id_taken(a, a.obstacles[ia].id, ia))
    a.obstacles[ia].id = a.next_free_id();
  if (id_taken(b, b.obstacles[ib].id, ib))
    b.obstacles[ib].id = b.next_free_id();
}

ScenarioGenome mutate_scenario(
    const ScenarioGenome& s,
    const std::map<std::int64_t, double>& own_min_distance,
    const ScenarioGenome& donor,
    const std::map<std::int64_t, double>& donor_min_distance, Rng& rng,
    double p_add, double p_remove, int min_obstacles, int max_obstacles) {
  ScenarioGenome out = s;

  if (rng.chance(p_add) &&
      static_cast<int>(out.obstacles.size()) < max_obstacles) {
    const ObstacleGenome* fittest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : donor.obstacles) {
      const auto it = donor_min_distance.find(o.id);
      const double d =
          it != donor_min_distance.end() ? it->second : best;
      if (!fittest || d < best) {
        fittest = &o;
        best = d;
      }
    }
    if (fittest) {
      ObstacleGenome copy = *fittest;
      copy.id = out.next_free_id();
      out.obstacles.push_back(copy);
    }
  }

  if (rng.chance(p_remove) &&
      static_cast<int>(out.obstacles.size()) > min_obstacles) {
    std::size_t worst_index = out.obstacles.size();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < out.obstacles.size(); ++k) {
      const auto it = own_min_distance.find(out.obstacles[k].id);
      if (it == own_min_distance.end()) continue;  // unevaluated: keep
      if (it->second > worst) {
        worst = it->second;
        worst_index = k;
      }
    }
    if (worst_index < out.obstacles.size())
      out.obstacles.erase(out.obstacles.begin() +
                          static_cast<std::ptrdiff_t>(worst_index));
  }
  return out;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  const auto av = a.as_array();
  const auto bv = b.as_array();
  bool strictly_better = false;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const bool minimize = kObjectiveDirections[i] == Direction::kMinimize;
    const double x = minimize ? av[i] : -av[i];
    const double y = minimize ? bv[i] : -bv[i];
    if (x > y) return false;
    if (x < y) strictly_better = true;
  }
  return strictly_better;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(
    std::span<const ObjectiveVector> objectives) {
  for (const auto& o : objectives) {
    for (double v : o.as_array()) {
      if (!std::isfinite(v))
        throw std::invalid_argument("non-finite objective value");
    }
  }
  const std::size_t n = objectives.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> dom_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;

  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(objectives[p], objectives[q]))
        dominated[p].push_back(q);
      else if (dominates(objectives[q], objectives[p]))
        ++dom_count[p];
    }
    if (dom_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    fronts.push_back(current);
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated[p]) {
        if (--dom_count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n == 0) return dist;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(n);
  for (std::size_t m = 0; m < 5; ++m) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return front[a].as_array()[m] < front[b].as_array()[m];
                     });
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    const double span =
        front[order.back()].as_array()[m] - front[order.front()].as_array()[m];
    if (span <= 0.0) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (std::isinf(dist[order[i]])) continue;
      dist[order[i]] += (front[order[i + 1]].as_array()[m] -
                         front[order[i - 1]].as_array()[m]) /
                        span;
    }
  }
  return dist;
}

std::vector<std::size_t> nsga2_select(std::span<const ObjectiveVector> pop,
                                      std::size_t k) {
  std::vector<std::size_t> selected;
  if (k == 0) return selected;
  const auto fronts = non_dominated_sort(pop);
  for (const auto& front : fronts) {
    if (selected.size() + front.size() <= k) {
      selected.insert(selected.end(), front.begin(), front.end());
      if (selected.size() == k) break;
      continue;
    }
    std::vector<ObjectiveVector> values;
    values.reserve(front.size());
    for (std::size_t idx : front) values.push_back(pop[idx]);
    const auto crowd = crowding_distance(values);
    std::vector<std::size_t> order(front.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (crowd[a] != crowd[b]) return crowd[a] > crowd[b];
      return front[a] < front[b];
    });
    for (std::size_t i = 0; selected.size() < k; ++i)
      selected.push_back(front[order[i]]);
    break;
  }
  return selected;
}

double scalar_fitness(const ObjectiveVector& obj, const ObjectiveRanges& norm) {
  const auto values = obj.as_array();
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double span = norm.max[i] - norm.min[i];
    double n = span > 0.0 ? (values[i] - norm.min[i]) / span : 0.0;
    n = std::clamp(n, 0.0, 1.0);
    sum += kObjectiveDirections[i] == Direction::kMaximize ? n : 1.0 - n;
  }
  return sum;
}

}  // namespace scenforge
