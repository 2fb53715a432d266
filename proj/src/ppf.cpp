#include "rantl/ppf.hpp"

#include <algorithm>

namespace rantl {

PfState PfState::initial(const NetState& state, const ScenarioConfig& cfg) {
  PfState pf;
  pf.avg_throughput_bps.assign(state.ues.size(), kPfFloorBps);
  pf.urllc_priority = cfg.pf_priority;
  pf.smoothing = cfg.pf_smoothing;
  return pf;
}

PpfDecision ppf_allocate(const NetState& state, PfState& pf, const ScenarioConfig& cfg) {
  const std::size_t n = state.ues.size();
  if (pf.avg_throughput_bps.size() != n)
    throw ContractViolation("PF state does not match the UE population");

  std::vector<double> residual(n);
  for (std::size_t u = 0; u < n; ++u) residual[u] = state.ues[u].queued_bits();

  auto metric = [&](std::size_t u) {
    const auto& ue = state.ues[u];
    const double prio = ue.slice == Slice::urllc && !ue.queue.empty() ? pf.urllc_priority : 1.0;
    const double rate_bps = ue.bits_per_rb / (cfg.tti_ms * 1e-3);
    return prio * rate_bps / std::max(pf.avg_throughput_bps[u], kPfFloorBps);
  };
  // Best UE among those passing `eligible`, ties to the lowest index.
  auto best = [&](auto eligible) {
    int winner = -1;
    double top = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (!eligible(u)) continue;
      const double m = metric(u);
      if (winner < 0 || m > top) {
        winner = static_cast<int>(u);
        top = m;
      }
    }
    return winner;
  };

  PpfDecision out;
  out.ue_rbs.assign(n, 0);
  for (int rb = 0; rb < cfg.total_rbs; ++rb) {
    int u = best([&](std::size_t v) { return residual[v] > 1e-9; });
    // Demand met everywhere: surplus RBs still go to backlogged UEs.
    if (u < 0) u = best([&](std::size_t v) { return !state.ues[v].queue.empty(); });
    if (u < 0) break;
    ++out.ue_rbs[u];
    residual[u] -= state.ues[u].bits_per_rb;
  }

  const double tti_s = cfg.tti_ms * 1e-3;
  for (std::size_t u = 0; u < n; ++u) {
    const double granted =
        std::min(out.ue_rbs[u] * state.ues[u].bits_per_rb, state.ues[u].queued_bits()) / tti_s;
    double& avg = pf.avg_throughput_bps[u];
    avg = std::max((1.0 - pf.smoothing) * avg + pf.smoothing * granted, kPfFloorBps);
  }

  const double urllc = state.compute_backlog(Slice::urllc);
  const double embb = state.compute_backlog(Slice::embb);
  out.cpu_urllc_fraction = urllc + embb > 0.0 ? urllc / (urllc + embb) : 0.5;
  return out;
}

}  // namespace rantl
