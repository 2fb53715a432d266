#include "rantl/runner.hpp"

#include <numeric>
#include <stdexcept>

#include "rantl/dqn.hpp"
#include "rantl/explore.hpp"
#include "rantl/ppf.hpp"
#include "rantl/seed.hpp"

namespace rantl {
namespace {

const std::vector<int>& full_grid() {
  static const std::vector<int> all = [] {
    std::vector<int> v(kJointActions);
    std::iota(v.begin(), v.end(), 0);
    return v;
  }();
  return all;
}

RunRecord make_trace(const ScenarioConfig& cfg, Algorithm algo, std::uint64_t seed) {
  RunRecord tr;
  tr.algorithm = algo;
  tr.seed = seed;
  const auto n = static_cast<std::size_t>(cfg.n_tti);
  tr.reward.assign(n, 0.0);
  tr.embb_bits.assign(n, 0.0);
  tr.urllc_delivered.assign(n, 0);
  tr.urllc_drops.assign(n, 0);
  tr.urllc_delay_sum.assign(n, 0.0);
  tr.actions.assign(cfg.n_bs, std::vector<int>(n, -1));
  tr.observations.assign(cfg.n_bs, std::vector<LearnerState>(n));
  return tr;
}

void record(RunRecord& tr, int cell, long t, const LearnerState& obs, int action,
            const TtiOutcome& out, int n_cells) {
  tr.reward[t] += out.reward / n_cells;
  tr.embb_bits[t] += out.embb_bits_served / n_cells;
  tr.urllc_delivered[t] += static_cast<long>(out.urllc_delay_samples.size());
  tr.urllc_drops[t] += out.urllc_drops;
  for (double d : out.urllc_delay_samples) {
    tr.urllc_delay_sum[t] += d;
    tr.urllc_delays.push_back(d);
    tr.urllc_delay_tti.push_back(t);
  }
  tr.actions[cell][t] = action;
  tr.observations[cell][t] = obs;
}

std::vector<double> as_vector(const LearnerState& s) { return {s.fill.begin(), s.fill.end()}; }

LearnerState from_fill(std::span<const double> v) {
  LearnerState s;
  for (int d = 0; d < kStateDims; ++d) {
    s.fill[d] = v[d];
    s.bucket[d] = quantize_fill(v[d]);
  }
  return s;
}

enum class Mode { plain, shaped, restricted };

RunRecord run_learner(const ScenarioConfig& cfg, Mode mode, const ExpertPair* experts,
                     std::uint64_t seed) {
  const Algorithm algo = mode == Mode::plain    ? Algorithm::dqn
                         : mode == Mode::shaped ? Algorithm::qtdrl
                                                : Algorithm::atdrl;
  if (mode != Mode::plain && experts == nullptr)
    throw std::invalid_argument(to_string(algo) + " needs trained experts");
  RunRecord tr = make_trace(cfg, algo, seed);
  const MappingSpec spec;
  const TransferSchedule transfer = TransferSchedule::from_config(cfg);
  const ExplorationSchedule explore{cfg.eps_start, cfg.eps_end, cfg.explore_tti};
  const DqnParams params = DqnParams::from_config(cfg);

  for (int cell = 0; cell < cfg.n_bs; ++cell) {
    SliceEnv env(cfg, cell_env_seed(seed, cell));
    DqnLearner learner(params, cell_agent_seed(seed, cell));
    long now = 0;
    // Shaping enters the TD target when a sample is replayed, at the
    // current beta, instead of being frozen into the stored reward.
    if (mode == Mode::shaped && transfer.beta0 != 0.0) {
      learner.set_target_bonus([&](std::span<const double> sv, int a) {
        return shaping_term(transfer, *experts, spec, from_fill(sv), JointAction::from_index(a), now);
      });
    }
    LearnerState s = env.observe();
    std::vector<int> allowed = mode == Mode::restricted
                                   ? reduced_action_set(*experts, spec, s, cfg.atdrl_k)
                                   : full_grid();
    for (long t = 0; t < cfg.n_tti; ++t) {
      const std::vector<double> sv = as_vector(s);
      const int a = learner.act(sv, explore.epsilon(t), allowed);
      const JointAction ja = JointAction::from_index(a);
      const TtiOutcome out = env.step(ja);
      const LearnerState next = env.observe();

      now = t;
      std::vector<int> next_allowed;
      if (mode == Mode::restricted) next_allowed = reduced_action_set(*experts, spec, next, cfg.atdrl_k);

      learner.step(Transition{sv, a, out.reward, as_vector(next), false, next_allowed}, 0.0);
      record(tr, cell, t, s, a, out, cfg.n_bs);
      s = next;
      if (mode == Mode::restricted) allowed = std::move(next_allowed);
    }
  }
  return tr;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::qtdrl: return "qtdrl";
    case Algorithm::atdrl: return "atdrl";
    case Algorithm::dqn: return "dqn";
    case Algorithm::ppf: return "ppf";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& s) {
  for (Algorithm a : kAllAlgorithms)
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected qtdrl, atdrl, dqn or ppf)");
}

bool needs_experts(Algorithm a) { return a == Algorithm::qtdrl || a == Algorithm::atdrl; }

std::uint64_t cell_env_seed(std::uint64_t run_seed, int cell) {
  return derive_seed(run_seed, 2 * static_cast<std::uint64_t>(cell));
}

std::uint64_t cell_agent_seed(std::uint64_t run_seed, int cell) {
  return derive_seed(run_seed, 2 * static_cast<std::uint64_t>(cell) + 1);
}

RunRecord run_dqn(const ScenarioConfig& cfg, std::uint64_t seed) {
  return run_learner(cfg, Mode::plain, nullptr, seed);
}

RunRecord run_qtdrl(const ScenarioConfig& cfg, const ExpertPair& experts, std::uint64_t seed) {
  return run_learner(cfg, Mode::shaped, &experts, seed);
}

RunRecord run_atdrl(const ScenarioConfig& cfg, const ExpertPair& experts, std::uint64_t seed) {
  return run_learner(cfg, Mode::restricted, &experts, seed);
}

RunRecord run_ppf(const ScenarioConfig& cfg, std::uint64_t seed) {
  RunRecord tr = make_trace(cfg, Algorithm::ppf, seed);
  for (int cell = 0; cell < cfg.n_bs; ++cell) {
    SliceEnv env(cfg, cell_env_seed(seed, cell));
    PfState pf = PfState::initial(env.state(), cfg);
    for (long t = 0; t < cfg.n_tti; ++t) {
      const LearnerState obs = env.observe();
      env.begin_tti();
      const PpfDecision d = ppf_allocate(env.state(), pf, cfg);
      record(tr, cell, t, obs, -1, env.serve(d.allocation()), cfg.n_bs);
    }
  }
  return tr;
}

RunRecord run_algorithm(const ScenarioConfig& cfg, Algorithm algo, const ExpertPair* experts,
                       std::uint64_t seed) {
  switch (algo) {
    case Algorithm::dqn: return run_dqn(cfg, seed);
    case Algorithm::ppf: return run_ppf(cfg, seed);
    case Algorithm::qtdrl:
    case Algorithm::atdrl:
      if (experts == nullptr)
        throw std::invalid_argument(to_string(algo) + " needs trained experts");
      return algo == Algorithm::qtdrl ? run_qtdrl(cfg, *experts, seed)
                                      : run_atdrl(cfg, *experts, seed);
  }
  throw std::logic_error("unhandled algorithm");
}

}  // namespace rantl
