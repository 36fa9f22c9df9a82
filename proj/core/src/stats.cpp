#include "scenforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace scenforge {

namespace {

// Midranks of the pooled sample (1-based, ties averaged).
std::vector<double> midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return pooled[a] < pooled[b];
                   });
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  return rank;
}

double u_statistic(const std::vector<double>& rank, std::size_t n) {
  double r1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) r1 += rank[i];
  return r1 - 0.5 * static_cast<double>(n) * static_cast<double>(n + 1);
}

// Exact two-sided p: share of group assignments whose U is at least as
// far from the null mean as the observed one.
double exact_p(const std::vector<double>& rank, std::size_t n, std::size_t m,
               double u_obs) {
  const std::size_t total = n + m;
  const double mean = 0.5 * static_cast<double>(n) * static_cast<double>(m);
  const double threshold = std::abs(u_obs - mean) - 1e-9;

  std::vector<char> mask(total, 0);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n), 1);
  std::sort(mask.begin(), mask.end(), std::greater<>());

  std::vector<double> sorted_rank = rank;
  std::sort(sorted_rank.begin(), sorted_rank.end());

  const double base = 0.5 * static_cast<double>(n) * static_cast<double>(n + 1);
  std::size_t extreme = 0, count = 0;
  do {
    double r1 = 0.0;
    for (std::size_t i = 0; i < total; ++i)
      if (mask[i]) r1 += sorted_rank[i];
    const double u = r1 - base;
    if (std::abs(u - mean) >= threshold) ++extreme;
    ++count;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return static_cast<double>(extreme) / static_cast<double>(count);
}

}  // namespace

double mann_whitney_u(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty())
    throw std::invalid_argument("mann_whitney_u: empty sample");
  const std::size_t n = xs.size();
  const std::size_t m = ys.size();
  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  const auto rank = midranks(pooled);
  const double u = u_statistic(rank, n);

  if (n <= 12 && m <= 12) return exact_p(rank, n, m, u);

  // Normal approximation with tie correction, no continuity correction.
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  const double total = nn + mm;
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }
  const double mean = 0.5 * nn * mm;
  const double variance =
      nn * mm / 12.0 * ((total + 1.0) - tie_sum / (total * (total - 1.0)));
  if (variance <= 0.0) return 1.0;  // all observations tied
  const double z = (u - mean) / std::sqrt(variance);
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

double vargha_delaney_a12(std::span<const double> xs,
                          std::span<const double> ys) {
  if (xs.empty() || ys.empty())
    throw std::invalid_argument("vargha_delaney_a12: empty sample");
  double wins = 0.0;
  for (double x : xs) {
    for (double y : ys) {
      if (x > y)
        wins += 1.0;
      else if (x == y)
        wins += 0.5;
    }
  }
  return wins / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

}  // namespace scenforge
