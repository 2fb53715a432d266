#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "rantl/action.hpp"
#include "rantl/config.hpp"

namespace rantl {

enum class Slice : int { urllc = 0, embb = 1 };
inline constexpr int kSlices = 2;
inline constexpr int kQuantLevels = 4;
inline constexpr int kStateDims = 4;

struct Packet {
  std::uint64_t id = 0;
  long arrival_tti = 0;
  int size_bits = 0;
  double cycles = 0.0;
  Slice slice = Slice::urllc;
  int ue_id = 0;
};

struct RadioPacket {
  Packet pkt;
  double remaining_bits = 0.0;
};

struct ComputeJob {
  Packet pkt;
  double remaining_cycles = 0.0;
};

struct UeState {
  Slice slice = Slice::urllc;
  double x_m = 0.0;
  double y_m = 0.0;
  double distance_m = 0.0;  // path-loss distance, floored at min_distance_m
  double path_gain = 0.0;   // linear
  double fading = 1.0;      // unit-mean exponential power
  double bits_per_rb = 0.0; // this TTI, after fading
  std::deque<RadioPacket> queue;

  double queued_bits() const;
};

struct SliceCounters {
  long arrived = 0;
  long departed = 0;
  long dropped = 0;
};

/// Raw simulator state of one base station. UEs are ordered URLLC first.
struct NetState {
  long tti = 0;
  std::vector<UeState> ues;
  std::array<std::deque<ComputeJob>, kSlices> compute;
  std::array<SliceCounters, kSlices> counters;
  std::array<int, kSlices> rr_cursor{0, 0};
  std::uint64_t next_packet_id = 0;

  std::size_t radio_packets(Slice s) const;
  std::size_t compute_packets(Slice s) const;
  double compute_backlog(Slice s) const;
  /// UE index range [first, last) of a slice.
  std::pair<int, int> slice_ues(Slice s) const;
};

/// Normalized queue fills and their 4-level quantization. Component order:
/// URLLC radio, eMBB radio, URLLC compute, eMBB compute.
struct LearnerState {
  std::array<double, kStateDims> fill{};
  std::array<int, kStateDims> bucket{};
};

struct Departure {
  std::uint64_t id = 0;
  Slice slice = Slice::urllc;
  double delay_ms = 0.0;
};

struct TtiOutcome {
  std::vector<double> urllc_delay_samples;  // ms, departures this TTI
  double embb_bits_served = 0.0;  // bits of eMBB packets that finished compute
  double embb_radio_bits = 0.0;   // eMBB bits sent over the air
  double urllc_radio_bits = 0.0;
  long urllc_drops = 0;
  long embb_drops = 0;
  double reward = 0.0;
  std::vector<Departure> departures;
};

/// RBs handed to each slice; each slice's share is served round-robin.
struct RadioSplit {
  int urllc_rbs = 0;
};
/// Explicit RB count per UE (index as in NetState::ues).
using RbAssignment = std::vector<int>;

struct Allocation {
  std::variant<RadioSplit, RbAssignment> radio;
  double cpu_urllc_fraction = 0.5;

  static Allocation from_action(const JointAction& a, int total_rbs);
};

int quantize_fill(double fill);

/// Discrete-TTI model of one MEC-enabled base station with a URLLC and an
/// eMBB slice. A TTI is begin_tti() (arrivals, fading) followed by serve().
class SliceEnv {
 public:
  SliceEnv(ScenarioConfig cfg, std::uint64_t seed);

  const NetState& state() const noexcept { return state_; }
  const ScenarioConfig& config() const noexcept { return cfg_; }

  void begin_tti();
  TtiOutcome serve(const Allocation& alloc);
  TtiOutcome step(const JointAction& action);

  LearnerState observe() const;

  /// Throws std::logic_error if arrived != queued + in_compute + departed + dropped.
  void check_conservation() const;

  /// eMBB bits per TTI the cell could deliver end to end: the smaller of
  /// every RB at the mean-fading eMBB rate and the whole CPU on eMBB work.
  double embb_capacity_estimate() const noexcept { return embb_capacity_bits_; }
  double urllc_packets_per_tti() const noexcept { return arrival_rate_[0]; }

  // Test hooks for link-budget checks.
  void set_fading_enabled(bool on) noexcept { fading_enabled_ = on; }
  void place_ue(int ue, double distance_m);
  double bits_per_rb_at(double distance_m, double fading) const;

 private:
  void draw_arrivals();
  void redraw_channels();
  void transmit(const std::vector<int>& ue_rbs, TtiOutcome& out);
  void drain_compute(double urllc_fraction, TtiOutcome& out);
  void drop_expired(TtiOutcome& out);
  void update_capacity_estimate();
  std::vector<int> round_robin(Slice s, int rbs);

  ScenarioConfig cfg_;
  NetState state_;
  std::mt19937_64 rng_;
  std::array<double, kSlices> arrival_rate_{};  // packets per TTI
  double embb_capacity_bits_ = 0.0;
  bool fading_enabled_ = true;
  bool tti_open_ = false;
};

}  // namespace rantl
