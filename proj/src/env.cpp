#include "rantl/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rantl {
namespace {

constexpr double kCycleEps = 1e-6;
constexpr double kBitEps = 1e-9;

int slice_index(Slice s) { return static_cast<int>(s); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double path_loss_db(double distance_m) {
  return 128.1 + 37.6 * std::log10(distance_m / 1000.0);
}

}  // namespace

double UeState::queued_bits() const {
  double total = 0.0;
  for (const auto& p : queue) total += p.remaining_bits;
  return total;
}

std::pair<int, int> NetState::slice_ues(Slice s) const {
  const auto split = static_cast<int>(std::count_if(
      ues.begin(), ues.end(), [](const UeState& u) { return u.slice == Slice::urllc; }));
  if (s == Slice::urllc) return {0, split};
  return {split, static_cast<int>(ues.size())};
}

std::size_t NetState::radio_packets(Slice s) const {
  std::size_t n = 0;
  for (const auto& u : ues)
    if (u.slice == s) n += u.queue.size();
  return n;
}

std::size_t NetState::compute_packets(Slice s) const { return compute[slice_index(s)].size(); }

double NetState::compute_backlog(Slice s) const {
  double total = 0.0;
  for (const auto& job : compute[slice_index(s)]) total += job.remaining_cycles;
  return total;
}

Allocation Allocation::from_action(const JointAction& a, int total_rbs) {
  if (!a.valid()) throw ContractViolation("joint action outside the 11x11 split grid");
  const int urllc_rbs = static_cast<int>(std::lround(a.radio_fraction() * total_rbs));
  return {RadioSplit{urllc_rbs}, a.cpu_fraction()};
}

// Buckets are closed on the upper edge, (k/4, (k+1)/4], so a fill on a
// boundary lands where the nearest-center mapping (ties to the lower bucket)
// puts it.
int quantize_fill(double fill) {
  const int b = static_cast<int>(std::ceil(std::clamp(fill, 0.0, 1.0) * kQuantLevels)) - 1;
  return std::clamp(b, 0, kQuantLevels - 1);
}

SliceEnv::SliceEnv(ScenarioConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), rng_(seed) {
  cfg_.validate();
  const double tti_s = cfg_.tti_ms * 1e-3;
  arrival_rate_[0] = cfg_.urllc_load_mbps * 1e6 / cfg_.urllc_pkt_bits * tti_s;
  arrival_rate_[1] = cfg_.embb_load_mbps * 1e6 / cfg_.embb_pkt_bits * tti_s;

  const double radius = cfg_.isd_m / 2.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n_ue = cfg_.n_urllc_ue + cfg_.n_embb_ue;
  state_.ues.resize(n_ue);
  for (int i = 0; i < n_ue; ++i) {
    auto& ue = state_.ues[i];
    ue.slice = i < cfg_.n_urllc_ue ? Slice::urllc : Slice::embb;
    const double r = radius * std::sqrt(unit(rng_));
    const double theta = 2.0 * std::numbers::pi * unit(rng_);
    ue.x_m = r * std::cos(theta);
    ue.y_m = r * std::sin(theta);
    place_ue(i, r);
  }
  update_capacity_estimate();
}

void SliceEnv::update_capacity_estimate() {
  double mean_bits = 0.0;
  for (int i = cfg_.n_urllc_ue; i < static_cast<int>(state_.ues.size()); ++i)
    mean_bits += bits_per_rb_at(state_.ues[i].distance_m, 1.0);
  const double radio = cfg_.total_rbs * mean_bits / cfg_.n_embb_ue;
  const double compute = cfg_.mec_capacity_gcps * 1e9 * cfg_.tti_ms * 1e-3 /
                         cfg_.embb_cycles_per_pkt * cfg_.embb_pkt_bits;
  embb_capacity_bits_ = std::min(radio, compute);
}

void SliceEnv::place_ue(int ue, double distance_m) {
  if (ue < 0 || ue >= static_cast<int>(state_.ues.size()))
    throw ContractViolation("UE index out of range");
  auto& u = state_.ues[ue];
  u.distance_m = std::max(distance_m, cfg_.min_distance_m);
  u.path_gain = db_to_linear(-path_loss_db(u.distance_m));
  u.fading = 1.0;
  u.bits_per_rb = bits_per_rb_at(u.distance_m, 1.0);
  if (ue >= cfg_.n_urllc_ue) update_capacity_estimate();
}

double SliceEnv::bits_per_rb_at(double distance_m, double fading) const {
  const double d = std::max(distance_m, cfg_.min_distance_m);
  const double rx_dbm = cfg_.tx_power_dbm_per_rb - path_loss_db(d);
  const double noise_dbm =
      cfg_.noise_dbm_per_hz + 10.0 * std::log10(cfg_.rb_bandwidth_hz) + cfg_.interference_margin_db;
  const double sinr = db_to_linear(rx_dbm - noise_dbm) * fading;
  return cfg_.rb_bandwidth_hz * cfg_.tti_ms * 1e-3 * std::log2(1.0 + sinr);
}

void SliceEnv::begin_tti() {
  if (tti_open_) throw ContractViolation("begin_tti called twice without serve");
  draw_arrivals();
  redraw_channels();
  tti_open_ = true;
}

void SliceEnv::draw_arrivals() {
  for (int s = 0; s < kSlices; ++s) {
    const auto slice = static_cast<Slice>(s);
    const auto [first, last] = state_.slice_ues(slice);
    std::poisson_distribution<int> count(arrival_rate_[s]);
    std::uniform_int_distribution<int> pick(first, last - 1);
    const int n = count(rng_);
    for (int k = 0; k < n; ++k) {
      Packet p;
      p.id = state_.next_packet_id++;
      p.arrival_tti = state_.tti;
      p.slice = slice;
      p.size_bits = slice == Slice::urllc ? cfg_.urllc_pkt_bits : cfg_.embb_pkt_bits;
      p.cycles = slice == Slice::urllc ? cfg_.urllc_cycles_per_pkt : cfg_.embb_cycles_per_pkt;
      p.ue_id = pick(rng_);
      state_.ues[p.ue_id].queue.push_back({p, static_cast<double>(p.size_bits)});
      ++state_.counters[s].arrived;
    }
  }
}

void SliceEnv::redraw_channels() {
  std::exponential_distribution<double> fade(1.0);
  for (auto& ue : state_.ues) {
    ue.fading = fading_enabled_ ? fade(rng_) : 1.0;
    ue.bits_per_rb = bits_per_rb_at(ue.distance_m, ue.fading);
  }
}

std::vector<int> SliceEnv::round_robin(Slice s, int rbs) {
  const auto [first, last] = state_.slice_ues(s);
  const int n = last - first;
  std::vector<int> grant(state_.ues.size(), 0);
  std::vector<double> residual(state_.ues.size(), 0.0);
  for (int u = first; u < last; ++u) residual[u] = state_.ues[u].queued_bits();

  int& cursor = state_.rr_cursor[slice_index(s)];
  for (int rb = 0; rb < rbs; ++rb) {
    int chosen = -1;
    for (int k = 0; k < n; ++k) {
      const int u = first + (cursor + k) % n;
      if (residual[u] > kBitEps) {
        chosen = u;
        break;
      }
    }
    if (chosen < 0) break;
    ++grant[chosen];
    residual[chosen] -= state_.ues[chosen].bits_per_rb;
    cursor = (chosen - first + 1) % n;
  }
  return grant;
}

void SliceEnv::transmit(const std::vector<int>& ue_rbs, TtiOutcome& out) {
  for (std::size_t u = 0; u < state_.ues.size(); ++u) {
    auto& ue = state_.ues[u];
    double budget = ue_rbs[u] * ue.bits_per_rb;
    double sent = 0.0;
    while (budget > kBitEps && !ue.queue.empty()) {
      auto& head = ue.queue.front();
      const double take = std::min(budget, head.remaining_bits);
      head.remaining_bits -= take;
      budget -= take;
      sent += take;
      if (head.remaining_bits <= kBitEps) {
        state_.compute[slice_index(ue.slice)].push_back({head.pkt, head.pkt.cycles});
        ue.queue.pop_front();
      }
    }
    (ue.slice == Slice::urllc ? out.urllc_radio_bits : out.embb_radio_bits) += sent;
  }
}

void SliceEnv::drain_compute(double urllc_fraction, TtiOutcome& out) {
  const double cycles_per_tti = cfg_.mec_capacity_gcps * 1e9 * cfg_.tti_ms * 1e-3;
  const std::array<double, kSlices> share{urllc_fraction, 1.0 - urllc_fraction};
  for (int s = 0; s < kSlices; ++s) {
    double budget = share[s] * cycles_per_tti;
    auto& fifo = state_.compute[s];
    while (!fifo.empty() && budget > 0.0) {
      auto& head = fifo.front();
      if (head.remaining_cycles <= budget + kCycleEps) {
        budget -= head.remaining_cycles;
        const double delay = (state_.tti - head.pkt.arrival_tti) * cfg_.tti_ms;
        out.departures.push_back({head.pkt.id, head.pkt.slice, delay});
        if (head.pkt.slice == Slice::urllc)
          out.urllc_delay_samples.push_back(delay);
        else
          out.embb_bits_served += head.pkt.size_bits;
        ++state_.counters[s].departed;
        fifo.pop_front();
      } else {
        head.remaining_cycles -= budget;
        budget = 0.0;
      }
    }
  }
}

void SliceEnv::drop_expired(TtiOutcome& out) {
  // A packet still held at the end of TTI t can only depart at t+1 or later.
  auto expired = [&](const Packet& p) {
    return (state_.tti + 1 - p.arrival_tti) * cfg_.tti_ms > cfg_.pkt_timeout_ms + 1e-9;
  };
  std::array<long, kSlices> dropped{0, 0};
  for (auto& ue : state_.ues) {
    while (!ue.queue.empty() && expired(ue.queue.front().pkt)) {
      ++dropped[slice_index(ue.slice)];
      ue.queue.pop_front();
    }
  }
  for (int s = 0; s < kSlices; ++s) {
    dropped[s] += std::erase_if(state_.compute[s],
                                [&](const ComputeJob& j) { return expired(j.pkt); });
    state_.counters[s].dropped += dropped[s];
  }
  out.urllc_drops = dropped[0];
  out.embb_drops = dropped[1];
}

TtiOutcome SliceEnv::serve(const Allocation& alloc) {
  if (!tti_open_) throw ContractViolation("serve called without begin_tti");
  if (!(alloc.cpu_urllc_fraction >= 0.0 && alloc.cpu_urllc_fraction <= 1.0))
    throw ContractViolation("CPU fraction outside [0, 1]");

  std::vector<int> ue_rbs;
  if (const auto* split = std::get_if<RadioSplit>(&alloc.radio)) {
    if (split->urllc_rbs < 0 || split->urllc_rbs > cfg_.total_rbs)
      throw ContractViolation("URLLC RB count outside [0, total_rbs]");
    ue_rbs = round_robin(Slice::urllc, split->urllc_rbs);
    const auto embb = round_robin(Slice::embb, cfg_.total_rbs - split->urllc_rbs);
    for (std::size_t u = 0; u < ue_rbs.size(); ++u) ue_rbs[u] += embb[u];
  } else {
    ue_rbs = std::get<RbAssignment>(alloc.radio);
    if (ue_rbs.size() != state_.ues.size())
      throw ContractViolation("per-UE RB assignment has wrong length");
    if (std::any_of(ue_rbs.begin(), ue_rbs.end(), [](int r) { return r < 0; }) ||
        std::accumulate(ue_rbs.begin(), ue_rbs.end(), 0) > cfg_.total_rbs)
      throw ContractViolation("per-UE RB assignment exceeds total_rbs");
  }

  TtiOutcome out;
  transmit(ue_rbs, out);
  drain_compute(alloc.cpu_urllc_fraction, out);
  drop_expired(out);

  // Little's law: URLLC packets held this TTI, over the arrival rate, is
  // the TTI's contribution to mean URLLC delay. Unlike a departures-only
  // mean it also charges packets that are starved or dropped.
  const double held = static_cast<double>(state_.radio_packets(Slice::urllc) +
                                          state_.compute_packets(Slice::urllc));
  const double delay_ms = held * cfg_.tti_ms / arrival_rate_[0];
  const double throughput_term = std::clamp(out.embb_bits_served / embb_capacity_bits_, 0.0, 1.0);
  const double delay_term = std::clamp(delay_ms / cfg_.delay_norm_ms, 0.0, 1.0);
  out.reward = throughput_term - delay_term;

  check_conservation();
  ++state_.tti;
  tti_open_ = false;
  return out;
}

TtiOutcome SliceEnv::step(const JointAction& action) {
  const Allocation alloc = Allocation::from_action(action, cfg_.total_rbs);
  begin_tti();
  return serve(alloc);
}

LearnerState SliceEnv::observe() const {
  const double compute_cap = cfg_.compute_cap_gcycles * 1e9;
  const double radio_cap = cfg_.radio_queue_cap_pkts;
  LearnerState ls;
  ls.fill = {
      state_.radio_packets(Slice::urllc) / radio_cap,
      state_.radio_packets(Slice::embb) / radio_cap,
      state_.compute_backlog(Slice::urllc) / compute_cap,
      state_.compute_backlog(Slice::embb) / compute_cap,
  };
  for (int d = 0; d < kStateDims; ++d) {
    ls.fill[d] = std::clamp(ls.fill[d], 0.0, 1.0);
    ls.bucket[d] = quantize_fill(ls.fill[d]);
  }
  return ls;
}

void SliceEnv::check_conservation() const {
  for (int s = 0; s < kSlices; ++s) {
    const auto slice = static_cast<Slice>(s);
    const auto& c = state_.counters[s];
    const long held =
        static_cast<long>(state_.radio_packets(slice) + state_.compute_packets(slice));
    if (c.arrived != held + c.departed + c.dropped)
      throw std::logic_error("packet conservation violated for slice " + std::to_string(s) +
                             " at TTI " + std::to_string(state_.tti));
  }
}

}  // namespace rantl
