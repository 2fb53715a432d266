#pragma once

#include <vector>

#include "rantl/config.hpp"
#include "rantl/env.hpp"

namespace rantl {

inline constexpr double kPfFloorBps = 1.0;

/// Exponentially averaged per-UE throughput for the priority PF metric.
struct PfState {
  std::vector<double> avg_throughput_bps;
  double urllc_priority = 8.0;
  double smoothing = 0.01;

  static PfState initial(const NetState& state, const ScenarioConfig& cfg);
};

struct PpfDecision {
  RbAssignment ue_rbs;
  double cpu_urllc_fraction = 0.5;

  Allocation allocation() const { return {ue_rbs, cpu_urllc_fraction}; }
};

/// Greedy RB-by-RB priority proportional fair schedule. Each RB goes to the
/// backlogged UE with the largest priority * rate / average, ties to the
/// lowest index; the CPU is split in proportion to compute backlog. Updates
/// `pf` averages with the throughput the schedule grants.
PpfDecision ppf_allocate(const NetState& state, PfState& pf, const ScenarioConfig& cfg);

}  // namespace rantl
