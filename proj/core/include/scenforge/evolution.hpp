#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "scenforge/validity.hpp"

namespace scenforge {

/// Scenario-scoped source of fresh obstacle ids.
struct IdAllocator {
  std::int64_t next = 1;
  std::int64_t allocate() { return next++; }
  static IdAllocator for_scenario(const ScenarioGenome& s) {
    return {s.next_free_id()};
  }
};

/// Two-point crossover over the 10-gene vector. Cut indices 0 <= i <= j <= 10
/// are drawn uniformly over all such pairs; genes in [i, j) are swapped.
/// Swapped-in ids are replaced with fresh ones, a child whose start moved
/// without its heading has the heading re-derived from the lane tangent,
/// and both children are repaired.
std::pair<ObstacleGenome, ObstacleGenome> two_point_crossover(
    const ObstacleGenome& a, const ObstacleGenome& b,
    const ConstraintTable& table, const LaneMap& map, Rng& rng,
    IdAllocator& ids);

/// Crossover with explicit cut points (0 <= cut_lo <= cut_hi <= 10).
std::pair<ObstacleGenome, ObstacleGenome> two_point_crossover_at(
    const ObstacleGenome& a, const ObstacleGenome& b, int cut_lo, int cut_hi,
    const ConstraintTable& table, const LaneMap& map, Rng& rng,
    IdAllocator& ids);

/// Resamples each non-id gene independently with probability p_gene from
/// its valid range, re-derives heading when the start moved, then repairs.
ObstacleGenome mutate_genes(const ObstacleGenome& ind,
                            const ConstraintTable& table, const LaneMap& map,
                            Rng& rng, double p_gene);

/// Partially-mutable baseline mutation: resamples exactly one random
/// non-id gene.
ObstacleGenome mutate_single_gene(const ObstacleGenome& ind,
                                  const ConstraintTable& table,
                                  const LaneMap& map, Rng& rng);

/// Partially-mutable baseline crossover: swaps one randomly chosen whole
/// obstacle each way between two scenarios, genes untouched (ids remapped
/// on collision).
void swap_obstacles(ScenarioGenome& a, ScenarioGenome& b, Rng& rng);

/// Cross-scenario mutation: with p_add copies the donor's obstacle with
/// the smallest evaluated min-distance (fresh id); with p_remove deletes
/// this scenario's obstacle with the largest evaluated min-distance.
/// Obstacles missing from own_min_distance are never chosen for removal.
/// The obstacle count is clamped to [min_obstacles, max_obstacles].
ScenarioGenome mutate_scenario(
    const ScenarioGenome& s,
    const std::map<std::int64_t, double>& own_min_distance,
    const ScenarioGenome& donor,
    const std::map<std::int64_t, double>& donor_min_distance, Rng& rng,
    double p_add, double p_remove, int min_obstacles = 1,
    int max_obstacles = 70);

/// True when a beats b in the violation-prone direction of at least one
/// objective and is no worse in all others.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Fast non-dominated sort. Front 0 is dominated by nothing; fronts
/// partition the input. Throws std::invalid_argument on non-finite values.
std::vector<std::vector<std::size_t>> non_dominated_sort(
    std::span<const ObjectiveVector> objectives);

/// NSGA-II crowding distance of one front. Boundary individuals per
/// objective get +inf; interiors accumulate normalized neighbor gaps.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

/// Survivor selection: fill by ascending front, final partial front by
/// descending crowding distance, ties broken by original index. Returns
/// selected indices in that deterministic order.
std::vector<std::size_t> nsga2_select(std::span<const ObjectiveVector> pop,
                                      std::size_t k);

struct ObjectiveRanges {
  std::array<double, 5> min{};
  std::array<double, 5> max{};
};

/// Reporting scalar in [0, 5]: each objective min-max normalized and
/// oriented so 1 = violation-prone, then summed. Never used for selection.
double scalar_fitness(const ObjectiveVector& obj, const ObjectiveRanges& norm);

}  // namespace scenforge
