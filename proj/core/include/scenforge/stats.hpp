#pragma once

#include <span>

namespace scenforge {

/// Two-sided Mann-Whitney U p-value with tie-corrected ranks. Uses exact
/// enumeration of the permutation distribution when both samples have at
/// most 12 observations, and the normal approximation beyond that.
/// Throws std::invalid_argument on an empty sample.
double mann_whitney_u(std::span<const double> xs, std::span<const double> ys);

/// Vargha-Delaney effect size: (#{x>y} + 0.5 #{x=y}) / (|xs| |ys|).
double vargha_delaney_a12(std::span<const double> xs, std::span<const double> ys);

}  // namespace scenforge
