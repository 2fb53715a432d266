#pragma once

#include <random>
#include <span>

namespace rantl {

/// Linear epsilon decay from `start` to `end` over `steps` steps, then flat.
struct ExplorationSchedule {
  double start = 1.0;
  double end = 0.05;
  int steps = 1000;

  double epsilon(long t) const {
    if (t >= steps) return end;
    return start + (end - start) * (static_cast<double>(t) / steps);
  }
};

/// Epsilon-greedy choice restricted to `allowed` (indices into `qvalues`).
/// Exactly one uniform draw is always consumed, plus one more on exploration,
/// so the random stream only depends on the epsilon outcome. Greedy ties go
/// to the lowest index.
int select_action(std::span<const double> qvalues, double epsilon, std::span<const int> allowed,
                  std::mt19937_64& rng);

}  // namespace rantl
