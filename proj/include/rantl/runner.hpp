#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rantl/config.hpp"
#include "rantl/env.hpp"
#include "rantl/transfer.hpp"

namespace rantl {

enum class Algorithm { qtdrl, atdrl, dqn, ppf };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::qtdrl, Algorithm::atdrl, Algorithm::dqn,
                                               Algorithm::ppf};

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);
bool needs_experts(Algorithm a);

/// Everything one run (all cells, n_tti TTIs) produced.
struct RunRecord {
  Algorithm algorithm = Algorithm::dqn;
  std::uint64_t seed = 0;
  std::vector<double> reward;            // per TTI, mean over cells
  std::vector<double> embb_bits;         // per TTI, mean over cells
  std::vector<long> urllc_delivered;     // per TTI, summed over cells
  std::vector<long> urllc_drops;         // per TTI, summed over cells
  std::vector<double> urllc_delay_sum;   // per TTI, ms, summed over cells
  std::vector<double> urllc_delays;      // every delivered URLLC packet, ms
  std::vector<long> urllc_delay_tti;     // departure TTI of each entry above
  std::vector<std::vector<int>> actions; // [cell][tti] joint index; -1 for ppf
  std::vector<std::vector<LearnerState>> observations;  // [cell][tti] before acting
};

/// Independent per-cell seeds derived from the run seed.
std::uint64_t cell_env_seed(std::uint64_t run_seed, int cell);
std::uint64_t cell_agent_seed(std::uint64_t run_seed, int cell);

RunRecord run_dqn(const ScenarioConfig& cfg, std::uint64_t seed);
/// DQN whose TD targets carry the expert shaping bonus while beta(t) > 0.
RunRecord run_qtdrl(const ScenarioConfig& cfg, const ExpertPair& experts, std::uint64_t seed);
/// DQN restricted, at every state, to the experts' top-k action product.
RunRecord run_atdrl(const ScenarioConfig& cfg, const ExpertPair& experts, std::uint64_t seed);
RunRecord run_ppf(const ScenarioConfig& cfg, std::uint64_t seed);

/// Dispatch; `experts` is required for qtdrl and atdrl.
RunRecord run_algorithm(const ScenarioConfig& cfg, Algorithm algo, const ExpertPair* experts,
                       std::uint64_t seed);

}  // namespace rantl
