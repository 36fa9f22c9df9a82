#include "scenforge/dedup.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace scenforge {

FeatureRecord extract_features(const Violation& v) {
  FeatureRecord rec;
  rec.numeric = {v.ego_position.x,      v.ego_position.y, v.ego_speed,
                 std::cos(v.ego_heading), std::sin(v.ego_heading)};
  if (v.kind == ViolationKind::kCollision) {
    rec.partition_key = std::string(to_string(v.kind)) + "/" +
                        to_string(v.collision_side) + "/" +
                        to_string(v.obstacle_kind);
    rec.numeric.push_back(v.obstacle_length);
    rec.numeric.push_back(v.obstacle_width);
    rec.numeric.push_back(v.obstacle_height);
    rec.numeric.push_back(v.obstacle_speed);
    rec.numeric.push_back(std::cos(v.obstacle_heading));
    rec.numeric.push_back(std::sin(v.obstacle_heading));
  } else {
    rec.partition_key = to_string(v.kind);
    rec.numeric.push_back(v.duration);
    rec.numeric.push_back(v.value);
  }
  return rec;
}

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace

double auto_epsilon(const std::vector<std::vector<double>>& points, int k) {
  constexpr double kFallback = 1e-6;
  const std::size_t n = points.size();
  if (n < 3 || k < 1) return kFallback;

  // Distance to the k-th nearest point, counting self as the 0th.
  std::vector<double> kdist;
  kdist.reserve(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = euclidean(points[i], points[j]);
    std::nth_element(row.begin(), row.begin() + k, row.end());
    kdist.push_back(row[static_cast<std::size_t>(k)]);
  }
  std::sort(kdist.begin(), kdist.end());

  const double first = kdist.front();
  const double last = kdist.back();
  if (last - first < 1e-12) return std::max(last, kFallback);

  // Max perpendicular distance to the chord between the curve endpoints.
  const double dx = static_cast<double>(n - 1);
  const double dy = last - first;
  const double len = std::hypot(dx, dy);
  double best = -1.0;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double px = static_cast<double>(i);
    const double py = kdist[i] - first;
    const double perp = std::abs(dx * py - dy * px) / len;
    if (perp > best) {
      best = perp;
      best_index = i;
    }
  }
  return std::max(kdist[best_index], kFallback);
}

std::vector<int> dbscan(const std::vector<std::vector<double>>& points,
                        double eps, int min_pts) {
  const std::size_t n = points.size();
  constexpr int kUndefined = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(n, kUndefined);

  auto neighbors_of = [&](std::size_t i) {
    std::vector<std::size_t> result;
    for (std::size_t j = 0; j < n; ++j)
      if (euclidean(points[i], points[j]) <= eps) result.push_back(j);
    return result;
  };

  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUndefined) continue;
    auto seeds = neighbors_of(i);
    if (seeds.size() < static_cast<std::size_t>(min_pts)) {
      label[i] = kNoise;
      continue;
    }
    label[i] = cluster;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t q = queue.front();
      queue.pop_front();
      if (label[q] == kNoise) label[q] = cluster;  // border point
      if (label[q] != kUndefined) continue;
      label[q] = cluster;
      auto qn = neighbors_of(q);
      if (qn.size() >= static_cast<std::size_t>(min_pts))
        queue.insert(queue.end(), qn.begin(), qn.end());
    }
    ++cluster;
  }
  return label;
}

DedupReport dedup(std::span<const Violation> violations) {
  DedupReport report;
  const std::size_t n = violations.size();
  report.cluster_of.assign(n, -1);
  if (n == 0) return report;

  std::vector<FeatureRecord> features;
  features.reserve(n);
  for (const auto& v : violations) features.push_back(extract_features(v));

  std::map<std::string, std::vector<std::size_t>> partitions;
  for (std::size_t i = 0; i < n; ++i)
    partitions[features[i].partition_key].push_back(i);

  int next_cluster = 0;
  for (const auto& [key, members] : partitions) {
    (void)key;
    const std::size_t m = members.size();
    if (m == 1) {
      report.cluster_of[members[0]] = next_cluster++;
      continue;
    }
    const std::size_t dims = features[members[0]].numeric.size();

    // z-score per dimension; drop zero-variance dimensions.
    std::vector<double> mean(dims, 0.0), stddev(dims, 0.0);
    for (std::size_t i : members)
      for (std::size_t d = 0; d < dims; ++d) mean[d] += features[i].numeric[d];
    for (std::size_t d = 0; d < dims; ++d) mean[d] /= static_cast<double>(m);
    for (std::size_t i : members)
      for (std::size_t d = 0; d < dims; ++d) {
        const double diff = features[i].numeric[d] - mean[d];
        stddev[d] += diff * diff;
      }
    std::vector<std::size_t> kept;
    for (std::size_t d = 0; d < dims; ++d) {
      stddev[d] = std::sqrt(stddev[d] / static_cast<double>(m));
      if (stddev[d] > 1e-12) kept.push_back(d);
    }

    if (kept.empty()) {
      // All members identical in feature space: one cluster.
      for (std::size_t i : members) report.cluster_of[i] = next_cluster;
      ++next_cluster;
      continue;
    }

    std::vector<std::vector<double>> pts;
    pts.reserve(m);
    for (std::size_t i : members) {
      std::vector<double> z;
      z.reserve(kept.size());
      for (std::size_t d : kept)
        z.push_back((features[i].numeric[d] - mean[d]) / stddev[d]);
      pts.push_back(std::move(z));
    }

    const int min_pts = 2;
    const double eps = auto_epsilon(pts, min_pts);
    const auto labels = dbscan(pts, eps, min_pts);
    int local_clusters = 0;
    for (int l : labels) local_clusters = std::max(local_clusters, l + 1);
    for (std::size_t idx = 0; idx < m; ++idx) {
      if (labels[idx] >= 0)
        report.cluster_of[members[idx]] = next_cluster + labels[idx];
    }
    int noise_base = next_cluster + local_clusters;
    for (std::size_t idx = 0; idx < m; ++idx) {
      if (labels[idx] < 0) report.cluster_of[members[idx]] = noise_base++;
    }
    next_cluster = noise_base;
  }

  // Representative per cluster: earliest t_first, ties to lowest index.
  std::map<int, std::size_t> rep_of;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = report.cluster_of[i];
    auto it = rep_of.find(c);
    if (it == rep_of.end() ||
        violations[i].t_first < violations[it->second].t_first) {
      rep_of[c] = i;
    }
  }
  for (const auto& [c, i] : rep_of) {
    (void)c;
    report.representatives.push_back(i);
  }
  std::sort(report.representatives.begin(), report.representatives.end());

  for (ViolationKind kind : kAllViolationKinds)
    report.per_kind[to_string(kind)] = {};
  for (std::size_t i = 0; i < n; ++i)
    report.per_kind[to_string(violations[i].kind)].all += 1;
  for (std::size_t i : report.representatives)
    report.per_kind[to_string(violations[i].kind)].unique += 1;

  for (auto& [kind, counts] : report.per_kind) {
    (void)kind;
    counts.eliminated_percent =
        counts.all == 0
            ? 0.0
            : 100.0 * (1.0 - static_cast<double>(counts.unique) /
                                 static_cast<double>(counts.all));
    report.total.all += counts.all;
    report.total.unique += counts.unique;
  }
  report.total.eliminated_percent =
      report.total.all == 0
          ? 0.0
          : 100.0 * (1.0 - static_cast<double>(report.total.unique) /
                               static_cast<double>(report.total.all));
  return report;
}

}  // namespace scenforge
