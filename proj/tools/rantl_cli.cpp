// rantl: train experts, run experiments and sweeps, render plots.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "rantl/config.hpp"
#include "rantl/experiment.hpp"
#include "rantl/report.hpp"
#include "rantl/store.hpp"

namespace {

// Exit codes, one per error class.
enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kMissingExperts = 4,
  kStore = 5,
  kMissingCsv = 6,
  kContract = 7,
  kIo = 8,
};

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string store = "expert_store";
  std::string out = "results";
  std::vector<std::string> algos;
  std::uint64_t seed_base = 1;
  int threads = 0;
};

rantl::ScenarioConfig load(const Common& c) {
  rantl::ScenarioConfig cfg = c.config.empty() ? rantl::ScenarioConfig{} : rantl::load_config(c.config);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw rantl::ConfigError("", "override '" + kv + "' is not key=value");
    rantl::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

rantl::ExperimentOptions options(const Common& c) {
  rantl::ExperimentOptions opt;
  if (!c.algos.empty()) {
    opt.algorithms.clear();
    for (const auto& a : c.algos) opt.algorithms.push_back(rantl::parse_algorithm(a));
  }
  opt.seed_base = c.seed_base;
  opt.threads = c.threads;
  return opt;
}

// Only touch the store when a transfer algorithm is requested.
std::optional<rantl::ExpertPair> experts_for(const rantl::ExperimentOptions& opt, const Common& c) {
  for (auto a : opt.algorithms)
    if (rantl::needs_experts(a)) return rantl::experts_from_store(c.store);
  return std::nullopt;
}

void add_config_flags(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key=value scenario file")->check(CLI::ExistingFile);
  sub->add_option("--set", c.overrides, "override one config key, key=value");
}

void add_run_flags(CLI::App* sub, Common& c) {
  add_config_flags(sub, c);
  sub->add_option("--algo", c.algos, "qtdrl, atdrl, dqn, ppf (repeat or comma-separate; default all)")
      ->delimiter(',');
  sub->add_option("--seed-base", c.seed_base, "first run seed; runs use seed-base + i");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--store", c.store, "expert store directory");
  sub->add_option("--threads", c.threads, "worker threads, 0 = all cores");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transfer-learning RAN slicing experiments"};
  app.require_subcommand(1);
  Common c;

  auto* train = app.add_subcommand("train-experts", "train radio and compute experts into the store");
  add_config_flags(train, c);
  train->add_option("--store", c.store, "expert store directory");
  train->add_option("--seed-base", c.seed_base, "training seed");

  auto* run = app.add_subcommand("run", "run every algorithm cfg.n_runs times and write CSVs");
  add_run_flags(run, c);
  bool no_traces = false;
  run->add_flag("--no-traces", no_traces, "skip per-run trace CSVs");

  auto* sweep = app.add_subcommand("sweep", "sweep URLLC load or MEC capacity");
  add_run_flags(sweep, c);
  std::string axis = "urllc_load";
  std::vector<double> points;
  sweep->add_option("--axis", axis, "urllc_load or mec_capacity")->check(CLI::IsMember({"urllc_load", "mec_capacity"}));
  sweep->add_option("--points", points, "sweep points (default from config)")->delimiter(',');

  auto* rep = app.add_subcommand("report", "render SVG plots from the CSVs in --out");
  rep->add_option("--out", c.out, "directory holding the CSVs");

  auto* store = app.add_subcommand("store", "inspect the expert store");
  store->require_subcommand(1);
  auto* list = store->add_subcommand("list", "list stored experts");
  list->add_option("--store", c.store, "expert store directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (train->parsed()) {
      const auto cfg = load(c);
      for (const auto& id : rantl::train_and_store_experts(cfg, c.store, c.seed_base))
        std::cout << "stored " << id << '\n';
    } else if (run->parsed()) {
      const auto cfg = load(c);
      auto opt = options(c);
      opt.write_traces = !no_traces;
      const auto experts = experts_for(opt, c);
      const auto res = rantl::run_experiment(cfg, opt, experts ? &*experts : nullptr, c.out);
      for (const auto& ar : res.algorithms)
        std::cout << rantl::to_string(ar.algorithm) << ": " << ar.runs.size() << " runs\n";
      std::cout << "wrote " << c.out << "/aggregate.csv\n";
    } else if (sweep->parsed()) {
      const auto cfg = load(c);
      const auto ax = rantl::parse_axis(axis);
      if (points.empty())
        points = ax == rantl::SweepAxis::urllc_load ? cfg.sweep_urllc_load : cfg.sweep_mec_capacity;
      const auto opt = options(c);
      const auto experts = experts_for(opt, c);
      const auto rows = rantl::run_sweep(cfg, ax, points, opt, experts ? &*experts : nullptr, c.out);
      std::cout << rows.size() << " rows -> " << c.out << '/' << rantl::sweep_file_name(ax) << '\n';
    } else if (rep->parsed()) {
      for (const auto& p : rantl::report(c.out)) std::cout << "wrote " << p.string() << '\n';
    } else if (list->parsed()) {
      for (const auto& a : rantl::ExpertStore(c.store).list()) {
        std::cout << a.sequence << '\t' << a.task_id << '\t';
        for (std::size_t i = 0; i < a.resources.size(); ++i)
          std::cout << (i ? "+" : "") << rantl::to_string(a.resources[i]);
        std::cout << '\t' << a.final_mean_reward << '\t' << a.created_at << '\n';
      }
    }
  } catch (const rantl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const rantl::MissingExpertsError& e) {
    std::cerr << "missing experts: " << e.what() << '\n';
    return kMissingExperts;
  } catch (const rantl::StoreError& e) {
    std::cerr << "store error: " << e.what() << '\n';
    return kStore;
  } catch (const rantl::MissingCsvError& e) {
    std::cerr << "missing input: " << e.what() << '\n';
    return kMissingCsv;
  } catch (const rantl::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kContract;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
