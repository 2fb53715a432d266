#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rantl/config.hpp"
#include "rantl/metrics.hpp"
#include "rantl/runner.hpp"
#include "rantl/store.hpp"

namespace rantl {

/// qtdrl/atdrl requested but the store holds no usable expert pair.
class MissingExpertsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Train the radio and compute experts and save them. Task ids are
/// "<dim>-<config hash>-s<seed>". Returns the two ids, radio first.
std::vector<std::string> train_and_store_experts(const ScenarioConfig& cfg,
                                                 const std::filesystem::path& store,
                                                 std::uint64_t seed);

/// Best-ranked radio-only and compute-only experts in the store.
ExpertPair experts_from_store(const std::filesystem::path& store);

/// seed_base, seed_base + 1, ...
std::vector<std::uint64_t> run_seeds(std::uint64_t seed_base, int n_runs);

/// Per-run scalar summary (one row of runs.csv).
struct RunSummary {
  Algorithm algorithm = Algorithm::dqn;
  std::uint64_t seed = 0;
  double reward_mean = 0.0;
  double reward_final_ma = 0.0;  // last value of the window-100 moving average
  long tti_to_90pct = 0;         // first TTI the moving average reaches 90% of its final value
  double urllc_delay_ms_mean = 0.0;
  double urllc_p_delay_gt_1ms = 0.0;
  double embb_throughput_mbps = 0.0;  // per cell
  long urllc_delivered = 0;
  long urllc_dropped = 0;
};

RunSummary summarize(const RunRecord& run, const ScenarioConfig& cfg);

/// Runs are independent; `threads` <= 0 means hardware concurrency. Results
/// come back in seed order whatever the scheduling.
std::vector<RunRecord> run_many(const ScenarioConfig& cfg, Algorithm algo,
                                const ExpertPair* experts, const std::vector<std::uint64_t>& seeds,
                                int threads = 0);

struct AlgorithmResult {
  Algorithm algorithm = Algorithm::dqn;
  std::vector<RunSummary> runs;
  std::vector<double> pooled_delays_ms;  // every delivered URLLC packet, all runs
  std::vector<Interval> convergence;     // per TTI, moving-average reward across runs
};

struct ExperimentResult {
  std::vector<AlgorithmResult> algorithms;
};

struct ExperimentOptions {
  std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  std::uint64_t seed_base = 1;
  int threads = 0;
  bool write_traces = true;
};

/// cfg.n_runs runs per algorithm. With a non-empty `out`, writes runs.csv,
/// aggregate.csv, ccdf.csv, convergence.csv and traces/<algo>-seed<n>.csv.
ExperimentResult run_experiment(const ScenarioConfig& cfg, const ExperimentOptions& opt,
                                const ExpertPair* experts, const std::filesystem::path& out);

enum class SweepAxis { urllc_load, mec_capacity };
std::string to_string(SweepAxis a);
SweepAxis parse_axis(const std::string& s);

struct SweepRow {
  SweepAxis axis = SweepAxis::urllc_load;
  double point = 0.0;
  Algorithm algorithm = Algorithm::dqn;
  int n_runs = 0;
  Interval urllc_delay_ms;
  Interval embb_throughput_mbps;
  Interval urllc_p_delay_gt_1ms;
};

/// One aggregate row per (algorithm, point). Needs at least two points.
/// With a non-empty `out`, writes sweep_<axis>.csv.
std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, SweepAxis axis,
                                const std::vector<double>& points, const ExperimentOptions& opt,
                                const ExpertPair* experts, const std::filesystem::path& out);

// CCDF thresholds written to ccdf.csv, in ms.
std::vector<double> ccdf_grid();

// CSV headers, fixed.
inline constexpr const char* kRunsHeader =
    "algorithm,seed,reward_mean,reward_final_ma100,tti_to_90pct,urllc_delay_ms_mean,"
    "urllc_p_delay_gt_1ms,embb_throughput_mbps,urllc_delivered_pkts,urllc_dropped_pkts";
inline constexpr const char* kAggregateHeader =
    "algorithm,n_runs,reward_mean,reward_mean_ci95,reward_final_ma100_mean,"
    "reward_final_ma100_ci95,tti_to_90pct_median,urllc_delay_ms_mean,urllc_delay_ms_ci95,"
    "urllc_p_delay_gt_1ms_pooled,embb_throughput_mbps_mean,embb_throughput_mbps_ci95";
inline constexpr const char* kCcdfHeader = "algorithm,threshold_ms,probability";
inline constexpr const char* kConvergenceHeader = "algorithm,tti,reward_ma100_mean,reward_ma100_ci95";
inline constexpr const char* kTraceHeader =
    "tti,reward,embb_bits,urllc_delivered_pkts,urllc_dropped_pkts,urllc_delay_ms_sum";
/// First column is the axis with its unit: urllc_load_mbps or mec_capacity_gcps.
std::string sweep_header(SweepAxis axis);
std::string sweep_file_name(SweepAxis axis);

}  // namespace rantl
