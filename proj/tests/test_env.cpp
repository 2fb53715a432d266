#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "rantl/config.hpp"
#include "rantl/env.hpp"
#include "support.hpp"

using namespace rantl;

TEST_CASE("config defaults describe the reference scenario") {
  const ScenarioConfig cfg;
  CHECK(cfg.n_bs == 3);
  CHECK(cfg.isd_m == 500.0);
  CHECK(cfg.n_urllc_ue == 10);
  CHECK(cfg.n_embb_ue == 5);
  CHECK(cfg.n_tti == 3000);
  CHECK(cfg.explore_tti == 1000);
  CHECK(cfg.n_runs == 10);
  CHECK(cfg.urllc_load_mbps == 2.0);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config errors name the field") {
  ScenarioConfig cfg;
  cfg.n_urllc_ue = 0;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "n_urllc_ue");
  }
  ScenarioConfig late;
  late.explore_tti = late.n_tti + 1;
  CHECK_THROWS_AS(late.validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_tti = abc\n"), ConfigError);
  CHECK_THROWS_AS(SliceEnv(cfg, 1), ConfigError);
}

TEST_CASE("config text round-trips") {
  ScenarioConfig cfg;
  cfg.urllc_load_mbps = 2.75;
  cfg.sweep_mec_capacity = {0.5, 1.25};
  cfg.cell = CellKind::lstm;
  const ScenarioConfig back = parse_config(cfg.to_text());
  CHECK(back.to_text() == cfg.to_text());
  CHECK(back.hash() == cfg.hash());
  cfg.n_tti = 2999;
  CHECK(back.hash() != cfg.hash());
}

TEST_CASE("fresh environment: UEs placed, queues empty") {
  const ScenarioConfig cfg;
  SliceEnv env(cfg, 7);
  const auto& st = env.state();
  REQUIRE(st.ues.size() == 15);
  int urllc = 0;
  for (const auto& u : st.ues) {
    if (u.slice == Slice::urllc) ++urllc;
    CHECK(u.queue.empty());
    CHECK(std::hypot(u.x_m, u.y_m) <= cfg.isd_m / 2 + 1e-9);
  }
  CHECK(urllc == 10);
  CHECK(st.compute[0].empty());
  CHECK(st.compute[1].empty());
  const auto obs = env.observe();
  for (int d = 0; d < kStateDims; ++d) {
    CHECK(obs.fill[d] == 0.0);
    CHECK(obs.bucket[d] == 0);
  }
}

TEST_CASE("same config and seed give the same placement") {
  const ScenarioConfig cfg;
  SliceEnv a(cfg, 7), b(cfg, 7), c(cfg, 8);
  bool differs = false;
  for (std::size_t i = 0; i < a.state().ues.size(); ++i) {
    CHECK(a.state().ues[i].x_m == b.state().ues[i].x_m);
    CHECK(a.state().ues[i].y_m == b.state().ues[i].y_m);
    CHECK(a.state().ues[i].path_gain == b.state().ues[i].path_gain);
    differs = differs || a.state().ues[i].x_m != c.state().ues[i].x_m;
  }
  CHECK(differs);
}

TEST_CASE("negligible load: nothing to serve") {
  ScenarioConfig cfg;
  cfg.urllc_load_mbps = 1e-12;
  cfg.embb_load_mbps = 1e-12;
  SliceEnv env(cfg, 3);
  for (int t = 0; t < 50; ++t) {
    const auto out = env.step(JointAction{t % 11, (3 * t) % 11});
    CHECK(out.urllc_delay_samples.empty());
    CHECK(out.embb_bits_served == 0.0);
    CHECK(out.embb_radio_bits == 0.0);
  }
}

TEST_CASE("link budget matches the closed form") {
  ScenarioConfig cfg;
  cfg.n_embb_ue = 1;
  cfg.embb_load_mbps = 2000.0;  // far beyond what 100 RBs carry
  SliceEnv env(cfg, 11);
  env.set_fading_enabled(false);
  const int ue = cfg.n_urllc_ue;
  const double d = 120.0;
  env.place_ue(ue, d);

  // hand evaluation, dB domain
  const double pl_db = 128.1 + 37.6 * std::log10(d / 1000.0);
  const double noise_dbm = -174.0 + 10.0 * std::log10(180e3) + 3.0;
  const double sinr = std::pow(10.0, (cfg.tx_power_dbm_per_rb - pl_db - noise_dbm) / 10.0);
  const double expected = 100 * 180e3 * 1e-3 * std::log2(1.0 + sinr);

  const auto out = env.step(JointAction{0, 5});
  CHECK(out.embb_radio_bits == doctest::Approx(expected).epsilon(1e-12));
  CHECK(env.bits_per_rb_at(d, 1.0) * 100 == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("observation quantization") {
  CHECK(quantize_fill(0.0) == 0);
  CHECK(quantize_fill(0.30) == 1);
  CHECK(quantize_fill(0.25) == 0);  // upper edge closed
  CHECK(quantize_fill(0.2500001) == 1);
  CHECK(quantize_fill(0.5) == 1);
  CHECK(quantize_fill(0.99) == 3);
  CHECK(quantize_fill(1.0) == 3);
  CHECK(quantize_fill(7.0) == 3);

  // a saturated URLLC radio queue clamps at 1 / bucket 3
  ScenarioConfig cfg;
  cfg.urllc_load_mbps = 40.0;
  cfg.radio_queue_cap_pkts = 8;
  SliceEnv env(cfg, 5);
  for (int t = 0; t < 5; ++t) env.step(JointAction{0, 5});  // no RBs for URLLC
  const auto obs = env.observe();
  CHECK(obs.fill[0] == 1.0);
  CHECK(obs.bucket[0] == 3);
}

TEST_CASE("action outside the grid is rejected") {
  SliceEnv env(ScenarioConfig{}, 1);
  CHECK_THROWS_AS(env.step(JointAction{11, 0}), ContractViolation);
  CHECK_THROWS_AS(env.step(JointAction{0, -1}), ContractViolation);
  CHECK_THROWS_AS(JointAction::from_index(121), ContractViolation);
}

TEST_CASE("conservation, delay sign and reward range under random actions") {
  ScenarioConfig cfg;
  cfg.pkt_timeout_ms = 8.0;  // make drops happen
  SliceEnv env(cfg, 21);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> lvl(0, 10);
  for (int t = 0; t < 1000; ++t) {
    const auto out = env.step(JointAction{lvl(rng), lvl(rng)});
    CHECK_NOTHROW(env.check_conservation());
    for (double d : out.urllc_delay_samples) {
      CHECK(d >= 0.0);
      CHECK(d <= cfg.pkt_timeout_ms);
    }
    CHECK(out.reward >= -1.0);
    CHECK(out.reward <= 1.0);
  }
  const auto& c = env.state().counters;
  CHECK(c[0].arrived == static_cast<long>(env.state().radio_packets(Slice::urllc) +
                                          env.state().compute_packets(Slice::urllc)) +
                            c[0].departed + c[0].dropped);
  CHECK(c[0].dropped + c[1].dropped > 0);
}

TEST_CASE("identical inputs give identical outcome streams") {
  const ScenarioConfig cfg;
  SliceEnv a(cfg, 9), b(cfg, 9);
  for (int t = 0; t < 300; ++t) {
    const JointAction act{(t * 7) % 11, (t * 3) % 11};
    const auto x = a.step(act), y = b.step(act);
    REQUIRE(x.reward == y.reward);
    REQUIRE(x.urllc_delay_samples == y.urllc_delay_samples);
    REQUIRE(x.embb_bits_served == y.embb_bits_served);
  }
}

TEST_CASE("more MEC capacity never delays a packet") {
  ScenarioConfig lo, hi;
  lo.mec_capacity_gcps = 1.0;
  hi.mec_capacity_gcps = 4.0;
  lo.pkt_timeout_ms = hi.pkt_timeout_ms = 1e6;  // keep every packet
  SliceEnv a(lo, 13), b(hi, 13);
  std::map<std::uint64_t, double> slow, fast;
  for (int t = 0; t < 600; ++t) {
    const JointAction act{(t * 5) % 11, 2 + (t % 7)};
    for (const auto& d : a.step(act).departures) slow[d.id] = d.delay_ms;
    for (const auto& d : b.step(act).departures) fast[d.id] = d.delay_ms;
  }
  REQUIRE(!slow.empty());
  for (const auto& [id, delay] : slow) {
    REQUIRE(fast.count(id) == 1);
    CHECK(fast[id] <= delay);
  }
}

TEST_CASE("same-TTI departure logs zero delay") {
  ScenarioConfig cfg;
  cfg.embb_load_mbps = 1e-12;
  cfg.mec_capacity_gcps = 50.0;
  SliceEnv env(cfg, 2);
  bool zero = false;
  for (int t = 0; t < 100 && !zero; ++t)
    for (double d : env.step(JointAction{10, 10}).urllc_delay_samples) zero = zero || d == 0.0;
  CHECK(zero);
}
