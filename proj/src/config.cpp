#include "rantl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

#include "rantl/digest.hpp"

namespace rantl {
namespace {

using Member = std::variant<int ScenarioConfig::*, double ScenarioConfig::*,
                            std::uint64_t ScenarioConfig::*, CellKind ScenarioConfig::*,
                            std::vector<double> ScenarioConfig::*>;

struct Field {
  const char* key;
  Member member;
};

// Order is the serialization order of to_text() and therefore of hash().
const std::vector<Field>& fields() {
  using C = ScenarioConfig;
  static const std::vector<Field> table = {
      {"n_bs", &C::n_bs},
      {"isd_m", &C::isd_m},
      {"min_distance_m", &C::min_distance_m},
      {"n_urllc_ue", &C::n_urllc_ue},
      {"n_embb_ue", &C::n_embb_ue},
      {"tti_ms", &C::tti_ms},
      {"n_tti", &C::n_tti},
      {"explore_tti", &C::explore_tti},
      {"n_runs", &C::n_runs},
      {"total_rbs", &C::total_rbs},
      {"rb_bandwidth_hz", &C::rb_bandwidth_hz},
      {"tx_power_dbm_per_rb", &C::tx_power_dbm_per_rb},
      {"noise_dbm_per_hz", &C::noise_dbm_per_hz},
      {"interference_margin_db", &C::interference_margin_db},
      {"urllc_load_mbps", &C::urllc_load_mbps},
      {"urllc_pkt_bits", &C::urllc_pkt_bits},
      {"embb_load_mbps", &C::embb_load_mbps},
      {"embb_pkt_bits", &C::embb_pkt_bits},
      {"urllc_cycles_per_pkt", &C::urllc_cycles_per_pkt},
      {"embb_cycles_per_pkt", &C::embb_cycles_per_pkt},
      {"mec_capacity_gcps", &C::mec_capacity_gcps},
      {"pkt_timeout_ms", &C::pkt_timeout_ms},
      {"rng_seed", &C::rng_seed},
      {"radio_queue_cap_pkts", &C::radio_queue_cap_pkts},
      {"compute_cap_gcycles", &C::compute_cap_gcycles},
      {"delay_norm_ms", &C::delay_norm_ms},
      {"gamma", &C::gamma},
      {"tabular_alpha", &C::tabular_alpha},
      {"expert_train_tti", &C::expert_train_tti},
      {"expert_episode_tti", &C::expert_episode_tti},
      {"learning_rate", &C::learning_rate},
      {"batch_size", &C::batch_size},
      {"warmup", &C::warmup},
      {"replay_capacity", &C::replay_capacity},
      {"target_sync", &C::target_sync},
      {"eps_start", &C::eps_start},
      {"eps_end", &C::eps_end},
      {"hidden_width", &C::hidden_width},
      {"cell", &C::cell},
      {"recurrent_unroll", &C::recurrent_unroll},
      {"beta0", &C::beta0},
      {"expert_weight_radio", &C::expert_weight_radio},
      {"atdrl_k", &C::atdrl_k},
      {"pf_priority", &C::pf_priority},
      {"pf_smoothing", &C::pf_smoothing},
      {"sweep_urllc_load", &C::sweep_urllc_load},
      {"sweep_mec_capacity", &C::sweep_mec_capacity},
  };
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T out{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  std::from_chars_result res;
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is available in libstdc++ 11
    res = std::from_chars(first, last, out, std::chars_format::general);
  } else {
    res = std::from_chars(first, last, out);
  }
  if (res.ec != std::errc{} || res.ptr != last)
    throw ConfigError(key, "cannot parse '" + text + "' as a number");
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string value_text(const ScenarioConfig& cfg, const Member& m) {
  return std::visit(
      [&](auto ptr) -> std::string {
        using T = std::remove_cvref_t<decltype(cfg.*ptr)>;
        const auto& v = cfg.*ptr;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, CellKind>) {
          return v == CellKind::dense ? "dense" : "lstm";
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string out;
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ",";
            out += format_double(v[i]);
          }
          return out;
        } else {
          return std::to_string(v);
        }
      },
      m);
}

}  // namespace

void set_config_value(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key != f.key) continue;
    std::visit(
        [&](auto ptr) {
          using T = std::remove_cvref_t<decltype(cfg.*ptr)>;
          if constexpr (std::is_same_v<T, CellKind>) {
            if (value == "dense")
              cfg.*ptr = CellKind::dense;
            else if (value == "lstm")
              cfg.*ptr = CellKind::lstm;
            else
              throw ConfigError(key, "expected 'dense' or 'lstm', got '" + value + "'");
          } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            std::vector<double> out;
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, trim(item)));
            cfg.*ptr = std::move(out);
          } else {
            cfg.*ptr = parse_number<T>(key, value);
          }
        },
        f.member);
    return;
  }
  throw ConfigError(key, "unknown configuration key");
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void ScenarioConfig::validate() const {
  auto count = [](const char* name, long v) {
    if (v < 1) throw ConfigError(name, "must be >= 1, got " + std::to_string(v));
  };
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(name, "must be a finite value > 0, got " + format_double(v));
  };
  auto finite = [](const char* name, double v) {
    if (!std::isfinite(v)) throw ConfigError(name, "must be finite");
  };
  auto unit = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(name, "must lie in [0, 1]");
  };

  count("n_bs", n_bs);
  count("n_urllc_ue", n_urllc_ue);
  count("n_embb_ue", n_embb_ue);
  count("n_tti", n_tti);
  count("explore_tti", explore_tti);
  count("n_runs", n_runs);
  count("total_rbs", total_rbs);
  count("urllc_pkt_bits", urllc_pkt_bits);
  count("embb_pkt_bits", embb_pkt_bits);
  count("radio_queue_cap_pkts", radio_queue_cap_pkts);
  count("batch_size", batch_size);
  count("replay_capacity", replay_capacity);
  count("target_sync", target_sync);
  count("hidden_width", hidden_width);
  count("recurrent_unroll", recurrent_unroll);
  count("atdrl_k", atdrl_k);
  if (explore_tti > n_tti) throw ConfigError("explore_tti", "must not exceed n_tti");
  if (expert_train_tti < 0) throw ConfigError("expert_train_tti", "must be >= 0");
  if (expert_episode_tti < 1) throw ConfigError("expert_episode_tti", "must be >= 1");
  if (warmup < 0) throw ConfigError("warmup", "must be >= 0");
  if (atdrl_k > 11) throw ConfigError("atdrl_k", "must be <= 11");

  positive("isd_m", isd_m);
  positive("min_distance_m", min_distance_m);
  positive("tti_ms", tti_ms);
  positive("rb_bandwidth_hz", rb_bandwidth_hz);
  positive("urllc_load_mbps", urllc_load_mbps);
  positive("embb_load_mbps", embb_load_mbps);
  positive("urllc_cycles_per_pkt", urllc_cycles_per_pkt);
  positive("embb_cycles_per_pkt", embb_cycles_per_pkt);
  positive("mec_capacity_gcps", mec_capacity_gcps);
  positive("pkt_timeout_ms", pkt_timeout_ms);
  positive("compute_cap_gcycles", compute_cap_gcycles);
  positive("delay_norm_ms", delay_norm_ms);
  positive("learning_rate", learning_rate);
  positive("pf_priority", pf_priority);
  finite("tx_power_dbm_per_rb", tx_power_dbm_per_rb);
  finite("noise_dbm_per_hz", noise_dbm_per_hz);
  finite("interference_margin_db", interference_margin_db);
  if (min_distance_m >= isd_m / 2) throw ConfigError("min_distance_m", "must be below isd_m / 2");

  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma", "must lie in [0, 1)");
  unit("tabular_alpha", tabular_alpha);
  unit("eps_start", eps_start);
  unit("eps_end", eps_end);
  if (eps_end > eps_start) throw ConfigError("eps_end", "must not exceed eps_start");
  if (!(beta0 >= 0.0) || !std::isfinite(beta0)) throw ConfigError("beta0", "must be >= 0");
  unit("expert_weight_radio", expert_weight_radio);
  if (!(pf_smoothing > 0.0 && pf_smoothing <= 1.0))
    throw ConfigError("pf_smoothing", "must lie in (0, 1]");

  for (double v : sweep_urllc_load) positive("sweep_urllc_load", v);
  for (double v : sweep_mec_capacity) positive("sweep_mec_capacity", v);
}

std::string ScenarioConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += value_text(*this, f.member);
    out += '\n';
  }
  return out;
}

std::string ScenarioConfig::hash() const {
  return sha256_hex(to_text()).substr(0, 16);
}

}  // namespace rantl
