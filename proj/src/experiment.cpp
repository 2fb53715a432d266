#include "rantl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "rantl/qtable.hpp"
#include "rantl/seed.hpp"

namespace fs = std::filesystem;

namespace rantl {
namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Half-width is NaN (an empty CSV cell) when fewer than two values exist.
Interval interval_of(const std::vector<double>& v) {
  if (v.size() >= 2) return confidence_interval(v);
  return {v.empty() ? std::numeric_limits<double>::quiet_NaN() : v.front(),
          std::numeric_limits<double>::quiet_NaN()};
}

std::ofstream open_csv(const fs::path& p, const char* header) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << header << '\n';
  return out;
}

void close_csv(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw std::runtime_error("error writing " + p.string());
}

template <class F>
std::vector<double> column(const std::vector<RunSummary>& runs, F f) {
  std::vector<double> v;
  v.reserve(runs.size());
  for (const auto& r : runs) v.push_back(f(r));
  return v;
}

}  // namespace

std::vector<std::string> train_and_store_experts(const ScenarioConfig& cfg, const fs::path& store,
                                                 std::uint64_t seed) {
  ExpertStore st(store);
  std::vector<std::string> ids;
  for (ResourceDim dim : {ResourceDim::radio, ResourceDim::compute}) {
    const std::uint64_t s = derive_seed(seed, dim == ResourceDim::radio ? 0 : 1);
    QTable table = train_expert(cfg, dim, s);
    const std::string id = to_string(dim) + "-" + cfg.hash() + "-s" + std::to_string(seed);
    ids.push_back(st.save(make_artifact(id, dim, std::move(table), cfg.hash())));
  }
  return ids;
}

ExpertPair experts_from_store(const fs::path& store) {
  if (!fs::is_directory(store / "experts"))
    throw MissingExpertsError("no expert store at " + store.string() +
                              "; run `rantl train-experts --store " + store.string() + "` first");
  const auto ranked = select_experts(store, TargetDescriptor{});
  std::optional<QTable> radio, compute;
  for (const auto& a : ranked) {
    if (a.resources.size() != 1) continue;
    if (a.resources[0] == ResourceDim::radio && !radio) radio = a.table;
    if (a.resources[0] == ResourceDim::compute && !compute) compute = a.table;
  }
  if (!radio || !compute)
    throw MissingExpertsError("store " + store.string() + " lacks a " +
                              std::string(!radio ? "radio" : "compute") +
                              " expert; run `rantl train-experts --store " + store.string() +
                              "` first");
  return ExpertPair{LoadedExpert(std::move(*radio)), LoadedExpert(std::move(*compute))};
}

std::vector<std::uint64_t> run_seeds(std::uint64_t seed_base, int n_runs) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n_runs; ++i) seeds.push_back(seed_base + static_cast<std::uint64_t>(i));
  return seeds;
}

RunSummary summarize(const RunRecord& run, const ScenarioConfig& cfg) {
  RunSummary s;
  s.algorithm = run.algorithm;
  s.seed = run.seed;
  s.reward_mean = mean_of(run.reward);
  const auto ma = moving_average(run.reward, 100);
  s.reward_final_ma = ma.empty() ? 0.0 : ma.back();
  s.tti_to_90pct = ma.empty() ? 0 : first_reach(ma, 0.9);
  s.urllc_delay_ms_mean = run.urllc_delays.empty() ? 0.0 : mean_of(run.urllc_delays);
  s.urllc_p_delay_gt_1ms = run.urllc_delays.empty() ? 0.0 : tail_probability(run.urllc_delays, 1.0);
  s.embb_throughput_mbps = mean_of(run.embb_bits) / (cfg.tti_ms * 1e-3) / 1e6;
  for (long d : run.urllc_delivered) s.urllc_delivered += d;
  for (long d : run.urllc_drops) s.urllc_dropped += d;
  return s;
}

std::vector<RunRecord> run_many(const ScenarioConfig& cfg, Algorithm algo,
                                const ExpertPair* experts, const std::vector<std::uint64_t>& seeds,
                                int threads) {
  if (needs_experts(algo) && experts == nullptr)
    throw MissingExpertsError(to_string(algo) +
                              " needs trained experts; run `rantl train-experts` first");
  std::vector<RunRecord> out(seeds.size());
  int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n = std::clamp(n, 1, std::max<int>(1, static_cast<int>(seeds.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        out[i] = run_algorithm(cfg, algo, experts, seeds[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<double> ccdf_grid() {
  std::vector<double> g;
  for (int ms = 0; ms <= 50; ++ms) g.push_back(ms);
  return g;
}

ExperimentResult run_experiment(const ScenarioConfig& cfg, const ExperimentOptions& opt,
                                const ExpertPair* experts, const fs::path& out) {
  cfg.validate();
  for (Algorithm a : opt.algorithms)
    if (needs_experts(a) && experts == nullptr)
      throw MissingExpertsError(to_string(a) +
                                " needs trained experts; run `rantl train-experts` first");
  const auto seeds = run_seeds(opt.seed_base, cfg.n_runs);
  if (!out.empty()) {
    fs::create_directories(out);
    if (opt.write_traces) fs::create_directories(out / "traces");
  }

  ExperimentResult result;
  for (Algorithm algo : opt.algorithms) {
    const auto runs = run_many(cfg, algo, experts, seeds, opt.threads);
    AlgorithmResult ar;
    ar.algorithm = algo;
    std::vector<std::vector<double>> ma;
    for (const auto& r : runs) {
      ar.runs.push_back(summarize(r, cfg));
      ar.pooled_delays_ms.insert(ar.pooled_delays_ms.end(), r.urllc_delays.begin(),
                                 r.urllc_delays.end());
      ma.push_back(moving_average(r.reward, 100));
    }
    for (long t = 0; t < cfg.n_tti; ++t) {
      std::vector<double> at;
      for (const auto& m : ma) at.push_back(m[t]);
      ar.convergence.push_back(interval_of(at));
    }
    if (!out.empty() && opt.write_traces) {
      for (const auto& r : runs) {
        const fs::path p = out / "traces" / (to_string(algo) + "-seed" + std::to_string(r.seed) + ".csv");
        auto f = open_csv(p, kTraceHeader);
        for (long t = 0; t < cfg.n_tti; ++t)
          f << t + 1 << ',' << num(r.reward[t]) << ',' << num(r.embb_bits[t]) << ','
            << r.urllc_delivered[t] << ',' << r.urllc_drops[t] << ',' << num(r.urllc_delay_sum[t])
            << '\n';
        close_csv(f, p);
      }
    }
    result.algorithms.push_back(std::move(ar));
  }

  if (out.empty()) return result;

  const fs::path runs_p = out / "runs.csv";
  auto runs_f = open_csv(runs_p, kRunsHeader);
  for (const auto& ar : result.algorithms)
    for (const auto& r : ar.runs)
      runs_f << to_string(r.algorithm) << ',' << r.seed << ',' << num(r.reward_mean) << ','
             << num(r.reward_final_ma) << ',' << r.tti_to_90pct << ',' << num(r.urllc_delay_ms_mean)
             << ',' << num(r.urllc_p_delay_gt_1ms) << ',' << num(r.embb_throughput_mbps) << ','
             << r.urllc_delivered << ',' << r.urllc_dropped << '\n';
  close_csv(runs_f, runs_p);

  const fs::path agg_p = out / "aggregate.csv";
  auto agg_f = open_csv(agg_p, kAggregateHeader);
  for (const auto& ar : result.algorithms) {
    const auto reward = interval_of(column(ar.runs, [](auto& r) { return r.reward_mean; }));
    const auto fin = interval_of(column(ar.runs, [](auto& r) { return r.reward_final_ma; }));
    const auto reach = column(ar.runs, [](auto& r) { return static_cast<double>(r.tti_to_90pct); });
    const auto delay = interval_of(column(ar.runs, [](auto& r) { return r.urllc_delay_ms_mean; }));
    const auto tput = interval_of(column(ar.runs, [](auto& r) { return r.embb_throughput_mbps; }));
    const double tail =
        ar.pooled_delays_ms.empty() ? 0.0 : tail_probability(ar.pooled_delays_ms, 1.0);
    agg_f << to_string(ar.algorithm) << ',' << ar.runs.size() << ',' << num(reward.mean) << ','
          << num(reward.half_width) << ',' << num(fin.mean) << ',' << num(fin.half_width) << ','
          << num(reach.empty() ? 0.0 : median_of(reach)) << ',' << num(delay.mean) << ','
          << num(delay.half_width) << ',' << num(tail) << ',' << num(tput.mean) << ','
          << num(tput.half_width) << '\n';
  }
  close_csv(agg_f, agg_p);

  const fs::path ccdf_p = out / "ccdf.csv";
  auto ccdf_f = open_csv(ccdf_p, kCcdfHeader);
  const auto grid = ccdf_grid();
  for (const auto& ar : result.algorithms) {
    if (ar.pooled_delays_ms.empty()) continue;
    for (const auto& pt : ccdf(ar.pooled_delays_ms, grid))
      ccdf_f << to_string(ar.algorithm) << ',' << num(pt.threshold_ms) << ','
             << num(pt.probability) << '\n';
  }
  close_csv(ccdf_f, ccdf_p);

  const fs::path conv_p = out / "convergence.csv";
  auto conv_f = open_csv(conv_p, kConvergenceHeader);
  for (const auto& ar : result.algorithms)
    for (std::size_t t = 0; t < ar.convergence.size(); ++t)
      conv_f << to_string(ar.algorithm) << ',' << t + 1 << ',' << num(ar.convergence[t].mean)
             << ',' << num(ar.convergence[t].half_width) << '\n';
  close_csv(conv_f, conv_p);
  return result;
}

std::string to_string(SweepAxis a) {
  return a == SweepAxis::urllc_load ? "urllc_load" : "mec_capacity";
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "urllc_load") return SweepAxis::urllc_load;
  if (s == "mec_capacity") return SweepAxis::mec_capacity;
  throw std::invalid_argument("unknown sweep axis '" + s + "' (expected urllc_load or mec_capacity)");
}

std::string sweep_header(SweepAxis axis) {
  return std::string(axis == SweepAxis::urllc_load ? "urllc_load_mbps" : "mec_capacity_gcps") +
         ",algorithm,n_runs,urllc_delay_ms_mean,urllc_delay_ms_ci95,embb_throughput_mbps_mean,"
         "embb_throughput_mbps_ci95,urllc_p_delay_gt_1ms_mean,urllc_p_delay_gt_1ms_ci95";
}

std::string sweep_file_name(SweepAxis axis) { return "sweep_" + to_string(axis) + ".csv"; }

std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, SweepAxis axis,
                                const std::vector<double>& points, const ExperimentOptions& opt,
                                const ExpertPair* experts, const fs::path& out) {
  if (points.size() < 2) throw std::invalid_argument("a sweep needs at least two points");
  for (Algorithm a : opt.algorithms)
    if (needs_experts(a) && experts == nullptr)
      throw MissingExpertsError(to_string(a) +
                                " needs trained experts; run `rantl train-experts` first");
  const auto seeds = run_seeds(opt.seed_base, cfg.n_runs);
  std::vector<SweepRow> rows;
  for (double point : points) {
    ScenarioConfig c = cfg;
    (axis == SweepAxis::urllc_load ? c.urllc_load_mbps : c.mec_capacity_gcps) = point;
    c.validate();
    for (Algorithm algo : opt.algorithms) {
      std::vector<RunSummary> runs;
      for (const auto& r : run_many(c, algo, experts, seeds, opt.threads))
        runs.push_back(summarize(r, c));
      SweepRow row;
      row.axis = axis;
      row.point = point;
      row.algorithm = algo;
      row.n_runs = static_cast<int>(runs.size());
      row.urllc_delay_ms = interval_of(column(runs, [](auto& r) { return r.urllc_delay_ms_mean; }));
      row.embb_throughput_mbps =
          interval_of(column(runs, [](auto& r) { return r.embb_throughput_mbps; }));
      row.urllc_p_delay_gt_1ms =
          interval_of(column(runs, [](auto& r) { return r.urllc_p_delay_gt_1ms; }));
      rows.push_back(row);
    }
  }
  if (!out.empty()) {
    fs::create_directories(out);
    const fs::path p = out / sweep_file_name(axis);
    const std::string header = sweep_header(axis);
    auto f = open_csv(p, header.c_str());
    for (const auto& r : rows)
      f << num(r.point) << ',' << to_string(r.algorithm) << ',' << r.n_runs << ','
        << num(r.urllc_delay_ms.mean) << ',' << num(r.urllc_delay_ms.half_width) << ','
        << num(r.embb_throughput_mbps.mean) << ',' << num(r.embb_throughput_mbps.half_width) << ','
        << num(r.urllc_p_delay_gt_1ms.mean) << ',' << num(r.urllc_p_delay_gt_1ms.half_width)
        << '\n';
    close_csv(f, p);
  }
  return rows;
}

}  // namespace rantl
