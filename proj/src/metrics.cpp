#include "rantl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace rantl {

std::vector<CcdfPoint> ccdf(std::span<const double> samples, std::span<const double> grid) {
  if (samples.empty()) throw std::invalid_argument("ccdf of an empty sample set");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<CcdfPoint> out;
  out.reserve(grid.size());
  for (double tau : grid) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), tau);
    out.push_back({tau, static_cast<double>(above) / n});
  }
  return out;
}

double tail_probability(std::span<const double> samples, double threshold) {
  const double grid[] = {threshold};
  return ccdf(samples, grid).front().probability;
}

Interval confidence_interval(std::span<const double> values, double level) {
  if (values.size() < 2)
    throw std::invalid_argument("confidence interval needs at least two values");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 0.5 + level / 2.0);
  return {mean, t * sd / std::sqrt(n)};
}

std::vector<double> moving_average(std::span<const double> values, int window) {
  if (window < 1) throw std::invalid_argument("moving-average window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

long first_reach(std::span<const double> curve, double fraction) {
  if (curve.empty()) throw std::invalid_argument("first_reach of an empty curve");
  const double final_value = curve.back();
  // For a negative end point, "90% of the way" means no worse than final / 0.9.
  const double target = final_value >= 0.0 ? fraction * final_value : final_value / fraction;
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve[i] >= target) return static_cast<long>(i) + 1;
  return static_cast<long>(curve.size());
}

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace rantl
