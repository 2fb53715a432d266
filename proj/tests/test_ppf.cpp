#include <doctest.h>

#include <numeric>

#include "rantl/ppf.hpp"

using namespace rantl;

namespace {

// A hand-built cell: `slices` in UE order, per-RB rates in Mb/s, queue of
// one large packet where `backlog` is set.
NetState cell(std::vector<Slice> slices, std::vector<double> rate_mbps, std::vector<bool> backlog) {
  NetState st;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    UeState u;
    u.slice = slices[i];
    u.bits_per_rb = rate_mbps[i] * 1e6 * 1e-3;  // bits one RB carries in a 1 ms TTI
    if (backlog[i]) {
      Packet p;
      p.slice = slices[i];
      p.size_bits = 1 << 20;
      u.queue.push_back({p, double(p.size_bits)});
    }
    st.ues.push_back(u);
  }
  return st;
}

ScenarioConfig rbs(int n) {
  ScenarioConfig cfg;
  cfg.total_rbs = n;
  return cfg;
}

}  // namespace

TEST_CASE("single backlogged UE takes every RB") {
  const auto st = cell({Slice::urllc, Slice::embb, Slice::embb}, {1, 1, 1}, {false, true, false});
  const auto cfg = rbs(100);
  PfState pf = PfState::initial(st, cfg);
  const auto d = ppf_allocate(st, pf, cfg);
  CHECK(d.ue_rbs == std::vector<int>{0, 100, 0});
}

TEST_CASE("first RB goes to the larger rate-over-average metric") {
  // rates (1, 2) Mb/s, averages (1, 4) Mb/s: metrics 1.0 and 0.5
  const auto st = cell({Slice::embb, Slice::embb}, {1.0, 2.0}, {true, true});
  const auto cfg = rbs(1);
  PfState pf = PfState::initial(st, cfg);
  pf.avg_throughput_bps = {1e6, 4e6};
  CHECK(ppf_allocate(st, pf, cfg).ue_rbs == std::vector<int>{1, 0});
}

TEST_CASE("URLLC priority outweighs a better eMBB rate") {
  // 8 * 0.5 / 1 = 4 beats 1 * 2.0 / 1 = 2
  const auto st = cell({Slice::urllc, Slice::embb}, {0.5, 2.0}, {true, true});
  const auto cfg = rbs(1);
  PfState pf = PfState::initial(st, cfg);
  pf.avg_throughput_bps = {1e6, 1e6};
  CHECK(ppf_allocate(st, pf, cfg).ue_rbs == std::vector<int>{1, 0});
}

TEST_CASE("every RB is assigned whenever anything is queued") {
  const auto st = cell({Slice::urllc, Slice::urllc, Slice::embb, Slice::embb}, {0.3, 0.2, 1.5, 0.9},
                       {true, false, true, true});
  const auto cfg = rbs(100);
  PfState pf = PfState::initial(st, cfg);
  const auto d = ppf_allocate(st, pf, cfg);
  CHECK(std::accumulate(d.ue_rbs.begin(), d.ue_rbs.end(), 0) == 100);
  CHECK(d.ue_rbs[1] == 0);  // empty queue excluded
}

TEST_CASE("pure PF with equal averages follows rate order") {
  ScenarioConfig cfg = rbs(1);
  cfg.pf_priority = 1.0;
  const auto st = cell({Slice::embb, Slice::embb, Slice::embb}, {0.7, 1.9, 1.2}, {true, true, true});
  PfState pf = PfState::initial(st, cfg);
  CHECK(ppf_allocate(st, pf, cfg).ue_rbs == std::vector<int>{0, 1, 0});
}

TEST_CASE("repeated calls on the same inputs agree; averages stay floored") {
  const auto st = cell({Slice::urllc, Slice::embb}, {0.4, 1.1}, {true, true});
  const auto cfg = rbs(50);
  PfState a = PfState::initial(st, cfg), b = a;
  CHECK(ppf_allocate(st, a, cfg).ue_rbs == ppf_allocate(st, b, cfg).ue_rbs);
  CHECK(a.avg_throughput_bps == b.avg_throughput_bps);

  const auto idle = cell({Slice::urllc, Slice::embb}, {0.4, 1.1}, {false, false});
  PfState c = PfState::initial(idle, cfg);
  const auto d = ppf_allocate(idle, c, cfg);
  CHECK(std::accumulate(d.ue_rbs.begin(), d.ue_rbs.end(), 0) == 0);
  for (double v : c.avg_throughput_bps) CHECK(v >= kPfFloorBps);
}

TEST_CASE("CPU split follows compute backlog") {
  auto st = cell({Slice::urllc, Slice::embb}, {1, 1}, {false, false});
  const auto cfg = rbs(10);
  PfState pf = PfState::initial(st, cfg);
  CHECK(ppf_allocate(st, pf, cfg).cpu_urllc_fraction == 0.5);
  st.compute[0].push_back({Packet{}, 3e5});
  st.compute[1].push_back({Packet{}, 1e5});
  CHECK(ppf_allocate(st, pf, cfg).cpu_urllc_fraction == doctest::Approx(0.75));
}
