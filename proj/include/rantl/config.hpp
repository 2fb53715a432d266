#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace rantl {

/// Raised for any invalid or unreadable configuration; `field()` names the
/// offending key when one is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Violated precondition of a library call (bad action index, topology
/// mismatch, out-of-domain state, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class CellKind { dense, lstm };

/// Full experiment parameterization. Defaults are the reference scenario;
/// every field can be overridden from a key=value file (see README).
struct ScenarioConfig {
  // topology
  int n_bs = 3;
  double isd_m = 500.0;
  double min_distance_m = 35.0;
  int n_urllc_ue = 10;
  int n_embb_ue = 5;

  // timing
  double tti_ms = 1.0;
  int n_tti = 3000;
  int explore_tti = 1000;
  int n_runs = 10;

  // radio
  int total_rbs = 100;
  double rb_bandwidth_hz = 180e3;
  double tx_power_dbm_per_rb = -16.0;
  double noise_dbm_per_hz = -174.0;
  double interference_margin_db = 3.0;

  // traffic and compute
  double urllc_load_mbps = 2.0;
  int urllc_pkt_bits = 256;
  double embb_load_mbps = 20.0;
  int embb_pkt_bits = 4096;
  double urllc_cycles_per_pkt = 100e3;
  double embb_cycles_per_pkt = 400e3;
  double mec_capacity_gcps = 3.0;
  double pkt_timeout_ms = 50.0;
  std::uint64_t rng_seed = 1;

  // observation and reward normalization
  int radio_queue_cap_pkts = 64;
  double compute_cap_gcycles = 0.002;
  double delay_norm_ms = 2.0;

  // learning
  double gamma = 0.95;
  double tabular_alpha = 0.1;
  int expert_train_tti = 20000;
  int expert_episode_tti = 500;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int warmup = 200;
  int replay_capacity = 10000;
  int target_sync = 100;
  double eps_start = 1.0;
  double eps_end = 0.05;
  int hidden_width = 30;
  CellKind cell = CellKind::dense;
  int recurrent_unroll = 8;

  // transfer
  double beta0 = 0.5;
  double expert_weight_radio = 0.5;
  int atdrl_k = 4;

  // priority proportional fair baseline
  double pf_priority = 8.0;
  double pf_smoothing = 0.01;

  // sweep axes
  std::vector<double> sweep_urllc_load{1.0, 2.0, 3.0};
  std::vector<double> sweep_mec_capacity{1.0, 2.0, 3.0, 4.0, 5.0};

  /// Throws ConfigError naming the first field that breaks an invariant.
  void validate() const;

  /// Stable digest of every field, used to tag stored experts.
  std::string hash() const;

  /// Serialized key=value form; `parse_config(to_text())` round-trips.
  std::string to_text() const;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Apply one key=value override; unknown keys raise ConfigError.
void set_config_value(ScenarioConfig& cfg, const std::string& key, const std::string& value);

}  // namespace rantl
