#pragma once

#include <span>
#include <utility>
#include <vector>

namespace rantl {

struct CcdfPoint {
  double threshold_ms = 0.0;
  double probability = 0.0;
};

/// Fraction of samples strictly above each threshold. Throws
/// std::invalid_argument on an empty sample set.
std::vector<CcdfPoint> ccdf(std::span<const double> samples, std::span<const double> grid);

/// Fraction of samples strictly above one threshold.
double tail_probability(std::span<const double> samples, double threshold);

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;
};

/// Student-t interval with n-1 degrees of freedom. Throws
/// std::invalid_argument for fewer than two values.
Interval confidence_interval(std::span<const double> values, double level = 0.95);

/// Trailing mean over the last `window` entries (fewer at the start).
std::vector<double> moving_average(std::span<const double> values, int window = 100);

/// 1-based index of the first entry of `curve` reaching `fraction` of its
/// last entry. For a nonpositive final value the comparison flips so that
/// "reaching" still means getting within the fraction of the end point.
long first_reach(std::span<const double> curve, double fraction = 0.9);

double mean_of(std::span<const double> values);
double median_of(std::vector<double> values);

}  // namespace rantl
