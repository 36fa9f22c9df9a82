#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "scenforge/oracles.hpp"

namespace scenforge {

/// Numeric features plus an exact-match partition key. Categorical
/// features (kind, collision side, obstacle kind) partition the space;
/// only numeric features enter the clustering distance. Headings are
/// embedded as (cos, sin) to avoid the +-pi seam.
struct FeatureRecord {
  std::string partition_key;
  std::vector<double> numeric;
};

FeatureRecord extract_features(const Violation& v);

/// k-distance knee heuristic: sorts each point's distance to its k-th
/// nearest neighbor (self counts as the 0th) and picks the value at the
/// maximum perpendicular distance to the first-to-last chord.
/// Falls back to 1e-6 when fewer than 3 points or zero spread.
double auto_epsilon(const std::vector<std::vector<double>>& points, int k);

/// Classic DBSCAN. Labels are cluster ids >= 0 or -1 for noise;
/// neighbor counts include the point itself. Deterministic in input order.
std::vector<int> dbscan(const std::vector<std::vector<double>>& points,
                        double eps, int min_pts);

struct KindDedup {
  std::size_t all = 0;
  std::size_t unique = 0;
  double eliminated_percent = 0.0;  // 100 * (1 - unique/all)
};

struct DedupReport {
  std::map<std::string, KindDedup> per_kind;  // keyed by violation kind name
  KindDedup total;
  // Parallel to the input: global cluster id per violation. Noise points
  // become singleton clusters.
  std::vector<int> cluster_of;
  // One representative per cluster: the member with the earliest t_first.
  std::vector<std::size_t> representatives;
};

/// Groups violations by partition key, standardizes the numeric features
/// (zero-variance dimensions dropped), picks eps automatically, and runs
/// DBSCAN with min_pts = 2. Empty input yields an empty report.
DedupReport dedup(std::span<const Violation> violations);

}  // namespace scenforge
